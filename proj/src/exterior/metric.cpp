#include "g2flow/metric.hpp"

namespace g2flow {

Metric::Metric(Matrix g, int orientation)
    : g_(std::move(g)), orientation_(orientation >= 0 ? 1 : -1), cache_(std::make_shared<Cache>()) {
  if (g_.rows() != g_.cols()) throw DimensionError("metric must be square");
  for (int i = 0; i < g_.rows(); ++i) {
    for (int j = 0; j < i; ++j) {
      if ((g_(i, j) - g_(j, i)).max_abs() > 1e-12 * (1.0 + g_(i, j).max_abs())) {
        throw MetricError("metric is not symmetric");
      }
    }
  }
  if (!is_positive_definite(g_)) throw MetricError("metric is not positive definite at every sample");
}

Metric Metric::identity(int n) { return Metric(Matrix::identity(n)); }

void Metric::ensure_inverse() const {
  std::call_once(cache_->inverse_once, [this] {
    cache_->inverse = g2flow::inverse(g_);
    cache_->sqrt_det = sqrt(determinant(g_));
  });
}

const Matrix& Metric::inverse() const {
  ensure_inverse();
  return cache_->inverse;
}

const Coefficient& Metric::sqrt_det() const {
  ensure_inverse();
  return cache_->sqrt_det;
}

const Matrix& Metric::inverse_compound(int k) const {
  if (k < 0 || k > dim()) throw DimensionError("compound degree out of range");
  const auto idx = static_cast<std::size_t>(k);
  std::call_once(cache_->compound_once[idx],
                 [this, k, idx] { cache_->compounds[idx] = compound(inverse(), k); });
  return cache_->compounds[idx];
}

Form Metric::volume() const {
  Form v(dim(), dim());
  v[0] = static_cast<double>(orientation_) * sqrt_det();
  return v;
}

Coefficient Metric::apply(const Vector& u, const Vector& v) const {
  Coefficient s = 0.0;
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      const auto& ui = u[static_cast<std::size_t>(i)];
      const auto& vj = v[static_cast<std::size_t>(j)];
      if (ui.is_zero() || vj.is_zero() || g_(i, j).is_zero()) continue;
      s += g_(i, j) * ui * vj;
    }
  }
  return s;
}

Form Metric::flat(const Vector& v) const {
  Form a(dim(), 1);
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      const auto& vj = v[static_cast<std::size_t>(j)];
      if (vj.is_zero() || g_(i, j).is_zero()) continue;
      a[i] += g_(i, j) * vj;
    }
  }
  return a;
}

Vector Metric::sharp(const Form& a) const {
  if (a.degree() != 1) throw DimensionError("sharp expects a 1-form");
  const Matrix& gi = inverse();
  Vector v(static_cast<std::size_t>(dim()), Coefficient(0.0));
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      if (a[j].is_zero() || gi(i, j).is_zero()) continue;
      v[static_cast<std::size_t>(i)] += gi(i, j) * a[j];
    }
  }
  return v;
}

int complement_sign(IndexMask m, int n) {
  const IndexMask all = (1u << n) - 1;
  return wedge_sign(m, all & ~m);
}

Form hodge_star(const Form& a, const Metric& g) {
  const int n = a.dim();
  if (g.dim() != n) throw DimensionError("metric and form dimension differ");
  const int k = a.degree();
  const Matrix& gk = g.inverse_compound(k);
  const IndexMask all = (1u << n) - 1;
  Form out(n, n - k);
  for (int K = 0; K < a.size(); ++K) {
    Coefficient raised = 0.0;
    for (int I = 0; I < a.size(); ++I) {
      if (a[I].is_zero() || gk(I, K).is_zero()) continue;
      raised += a[I] * gk(I, K);
    }
    if (raised.is_zero()) continue;
    const IndexMask m = a.mask(K);
    if (complement_sign(m, n) > 0) {
      out.at_mask(all & ~m) += raised;
    } else {
      out.at_mask(all & ~m) -= raised;
    }
  }
  return out * (static_cast<double>(g.orientation()) * g.sqrt_det());
}

Coefficient inner(const Form& a, const Form& b, const Metric& g) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw DimensionError("inner product shape mismatch");
  const Matrix& gk = g.inverse_compound(a.degree());
  Coefficient s = 0.0;
  for (int I = 0; I < a.size(); ++I) {
    if (a[I].is_zero()) continue;
    for (int J = 0; J < b.size(); ++J) {
      if (b[J].is_zero() || gk(I, J).is_zero()) continue;
      s += a[I] * b[J] * gk(I, J);
    }
  }
  return s;
}

Coefficient norm2(const Form& a, const Metric& g) { return inner(a, a, g); }

Coefficient inner(const Matrix& a, const Matrix& b, const Metric& g) {
  const Matrix& gi = g.inverse();
  const Matrix ra = gi * a * gi;
  Coefficient s = 0.0;
  for (int k = 0; k < g.dim(); ++k) {
    for (int l = 0; l < g.dim(); ++l) {
      if (ra(k, l).is_zero() || b(k, l).is_zero()) continue;
      s += ra(k, l) * b(k, l);
    }
  }
  return s;
}

}  // namespace g2flow
