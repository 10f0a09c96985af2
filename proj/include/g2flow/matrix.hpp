#pragma once

#include <vector>

#include "g2flow/coefficient.hpp"

namespace g2flow {

/// Thrown when a linear system or metric is singular or indefinite at some sample.
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense matrix of coefficients; also used for symmetric 2-tensors and endomorphisms.
/// Endomorphisms follow J(e_b) = Σ_a J(a, b) e_a.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  static Matrix identity(int n);
  static Matrix diagonal(const std::vector<Coefficient>& d);

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  Coefficient& operator()(int i, int j) { return a_[index(i, j)]; }
  [[nodiscard]] const Coefficient& operator()(int i, int j) const { return a_[index(i, j)]; }

  [[nodiscard]] Matrix transpose() const;
  [[nodiscard]] Coefficient trace() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] Matrix at_sample(int i) const;
  [[nodiscard]] GridPtr grid() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(const Coefficient& s);
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(const Coefficient& s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j);
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Coefficient> a_;
};

/// Solves A X = B by Gaussian elimination; the pivot row maximizes the smallest |entry| over samples.
Matrix solve(const Matrix& a, const Matrix& b);
Matrix inverse(const Matrix& a);
Coefficient determinant(const Matrix& a);
/// Least-squares solution of the consistent overdetermined system A X = B via the normal equations.
Matrix least_squares(const Matrix& a, const Matrix& b);
/// k-th compound matrix: entry (I, J) is the minor on increasing index sets I, J (basis-table order).
Matrix compound(const Matrix& m, int k);
/// True iff the symmetric matrix admits a Cholesky factorization at every sample.
bool is_positive_definite(const Matrix& m);

}  // namespace g2flow
