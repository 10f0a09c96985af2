#include "g2flow/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "g2flow/form.hpp"

namespace g2flow {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  a_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Coefficient(0.0));
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const std::vector<Coefficient>& d) {
  const int n = static_cast<int>(d.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Coefficient Matrix::trace() const {
  Coefficient t = 0.0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& c : a_) m = std::max(m, c.max_abs());
  return m;
}

Matrix Matrix::at_sample(int i) const {
  Matrix m = *this;
  for (auto& c : m.a_) c = c.at_sample(i);
  return m;
}

GridPtr Matrix::grid() const {
  GridPtr g;
  for (const auto& c : a_) g = common_grid(g, c.grid());
  return g;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shape mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shape mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

Matrix& Matrix::operator*=(const Coefficient& s) {
  for (auto& c : a_) c *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      if (a(i, k).is_zero()) continue;
      for (int j = 0; j < b.cols(); ++j) {
        if (b(k, j).is_zero()) continue;
        c(i, j) += a(i, k) * b(k, j);
      }
    }
  }
  return c;
}

namespace {

double min_abs(const Coefficient& c) {
  if (c.is_constant()) return std::abs(c.value());
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.size(); ++i) m = std::min(m, std::abs(c.value(i)));
  return m;
}

// Forward elimination on [a | b]; returns the sign of the row permutation.
int eliminate(Matrix& a, Matrix& b, std::vector<Coefficient>* pivots) {
  const int n = a.rows();
  int sign = 1;
  double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
  for (int col = 0; col < n; ++col) {
    int best = -1;
    double best_val = -1.0;
    for (int r = col; r < n; ++r) {
      const double v = min_abs(a(r, col));
      if (v > best_val) {
        best_val = v;
        best = r;
      }
    }
    if (best_val <= 1e-14 * scale) {
      if (pivots) {
        pivots->push_back(0.0);
        return 0;
      }
      throw MetricError("singular matrix in linear solve");
    }
    if (best != col) {
      sign = -sign;
      for (int j = 0; j < n; ++j) std::swap(a(best, j), a(col, j));
      for (int j = 0; j < b.cols(); ++j) std::swap(b(best, j), b(col, j));
    }
    const Coefficient p = a(col, col);
    if (pivots) pivots->push_back(p);
    const Coefficient inv = 1.0 / p;
    for (int r = col + 1; r < n; ++r) {
      if (a(r, col).is_zero()) continue;
      const Coefficient f = a(r, col) * inv;
      a(r, col) = 0.0;
      for (int j = col + 1; j < n; ++j) {
        if (!a(col, j).is_zero()) a(r, j) -= f * a(col, j);
      }
      for (int j = 0; j < b.cols(); ++j) {
        if (!b(col, j).is_zero()) b(r, j) -= f * b(col, j);
      }
    }
  }
  return sign;
}

}  // namespace

Matrix solve(const Matrix& a_in, const Matrix& b_in) {
  if (a_in.rows() != a_in.cols() || b_in.rows() != a_in.rows()) {
    throw DimensionError("solve requires a square system");
  }
  Matrix a = a_in;
  Matrix b = b_in;
  eliminate(a, b, nullptr);
  const int n = a.rows();
  Matrix x(n, b.cols());
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = n - 1; i >= 0; --i) {
      Coefficient s = b(i, j);
      for (int k = i + 1; k < n; ++k) {
        if (!a(i, k).is_zero() && !x(k, j).is_zero()) s -= a(i, k) * x(k, j);
      }
      x(i, j) = s / a(i, i);
    }
  }
  return x;
}

Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

Coefficient determinant(const Matrix& a_in) {
  if (a_in.rows() != a_in.cols()) throw DimensionError("determinant of a non-square matrix");
  Matrix a = a_in;
  Matrix b(a.rows(), 0);
  std::vector<Coefficient> pivots;
  const int sign = eliminate(a, b, &pivots);
  if (sign == 0) return 0.0;
  Coefficient det = static_cast<double>(sign);
  for (const auto& p : pivots) det *= p;
  return det;
}

Matrix least_squares(const Matrix& a, const Matrix& b) {
  const Matrix at = a.transpose();
  return solve(at * a, at * b);
}

Matrix compound(const Matrix& m, int k) {
  if (m.rows() != m.cols()) throw DimensionError("compound of a non-square matrix");
  const int n = m.rows();
  if (k == 0) return Matrix::identity(1);
  if (k == 1) return m;
  const Matrix prev = compound(m, k - 1);
  const BasisTable& tk = BasisTable::get(n, k);
  const BasisTable& tp = BasisTable::get(n, k - 1);
  Matrix out(tk.size(), tk.size());
  for (int r = 0; r < tk.size(); ++r) {
    const IndexMask rows = tk.mask(r);
    const int i0 = std::countr_zero(rows);
    const int prow = tp.slot(rows & ~(1u << i0));
    for (int c = 0; c < tk.size(); ++c) {
      const IndexMask cols = tk.mask(c);
      Coefficient det = 0.0;
      int pos = 0;
      for (IndexMask rest = cols; rest != 0; rest &= rest - 1, ++pos) {
        const int j = std::countr_zero(rest);
        const Coefficient& mij = m(i0, j);
        if (mij.is_zero()) continue;
        const Coefficient& minor = prev(prow, tp.slot(cols & ~(1u << j)));
        if (minor.is_zero()) continue;
        if (pos & 1) {
          det -= mij * minor;
        } else {
          det += mij * minor;
        }
      }
      out(r, c) = det;
    }
  }
  return out;
}

bool is_positive_definite(const Matrix& m) {
  const int n = m.rows();
  if (n != m.cols()) return false;
  GridPtr g = m.grid();
  const int samples = g ? g->count : 1;
  std::vector<double> l(static_cast<std::size_t>(n * n));
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = m(i, j).value(m(i, j).is_constant() ? 0 : s);
        for (int k = 0; k < j; ++k) sum -= l[static_cast<std::size_t>(i * n + k)] * l[static_cast<std::size_t>(j * n + k)];
        if (i == j) {
          if (!(sum > 0.0)) return false;
          l[static_cast<std::size_t>(i * n + i)] = std::sqrt(sum);
        } else {
          l[static_cast<std::size_t>(i * n + j)] = sum / l[static_cast<std::size_t>(j * n + j)];
        }
      }
    }
  }
  return true;
}

}  // namespace g2flow
