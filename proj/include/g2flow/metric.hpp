#pragma once

#include <array>
#include <memory>
#include <mutex>

#include "g2flow/form.hpp"
#include "g2flow/matrix.hpp"

namespace g2flow {

/// Riemannian metric in the coframe, g = Σ g_ij e^i e^j, with an orientation sign
/// (+1 means e^{1..n} is positively oriented).
class Metric {
 public:
  Metric() = default;
  explicit Metric(Matrix g, int orientation = 1);
  static Metric identity(int n);

  [[nodiscard]] int dim() const { return g_.rows(); }
  [[nodiscard]] int orientation() const { return orientation_; }
  [[nodiscard]] const Matrix& matrix() const { return g_; }
  [[nodiscard]] const Coefficient& operator()(int i, int j) const { return g_(i, j); }
  [[nodiscard]] const Matrix& inverse() const;
  [[nodiscard]] const Coefficient& sqrt_det() const;
  /// Compound matrix of the inverse metric: the induced inner product on Λ^k.
  [[nodiscard]] const Matrix& inverse_compound(int k) const;

  /// Riemannian volume form.
  [[nodiscard]] Form volume() const;
  [[nodiscard]] Coefficient apply(const Vector& u, const Vector& v) const;
  /// Index lowering v ↦ g(v, ·).
  [[nodiscard]] Form flat(const Vector& v) const;
  /// Index raising of a 1-form.
  [[nodiscard]] Vector sharp(const Form& a) const;

 private:
  struct Cache {
    std::once_flag inverse_once;
    Matrix inverse;
    Coefficient sqrt_det;
    std::array<std::once_flag, kMaxFrameDim + 1> compound_once;
    std::array<Matrix, kMaxFrameDim + 1> compounds;
  };
  void ensure_inverse() const;

  Matrix g_;
  int orientation_ = 1;
  std::shared_ptr<Cache> cache_;
};

Form hodge_star(const Form& a, const Metric& g);
Coefficient inner(const Form& a, const Form& b, const Metric& g);
Coefficient norm2(const Form& a, const Metric& g);
/// Inner product of symmetric 2-tensors: Σ g^{ik} g^{jl} a_ij b_kl.
Coefficient inner(const Matrix& a, const Matrix& b, const Metric& g);
/// Sign of the permutation (I, complement of I) of {0..n-1}.
int complement_sign(IndexMask m, int n);

}  // namespace g2flow
