#include "g2flow/coefficient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace g2flow {

namespace {

struct Shape {
  GridPtr grid;
  int order = 0;
};

Shape binary_shape(const Coefficient& a, const Coefficient& b) {
  return {common_grid(a.grid(), b.grid()), std::min(a.order(), b.order())};
}

Shape unary_shape(const Coefficient& a) { return {a.grid(), a.order()}; }

// Gathers the jet of c at sample i into out (constants broadcast).
void gather(const Coefficient& c, int i, std::span<double> out) {
  if (c.is_constant()) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = c.value();
    return;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = c.taylor(static_cast<int>(k), i);
}

// Evaluates fn(i, jet_out) per sample and assembles the result.
template <class Fn>
Coefficient build(const Shape& s, Fn&& fn) {
  if (!s.grid) {
    double out = 0.0;
    fn(0, std::span<double>(&out, 1));
    return out;
  }
  const int n = s.grid->count;
  const auto terms = static_cast<std::size_t>(s.order + 1);
  std::vector<double> jet(terms);
  std::vector<double> data(static_cast<std::size_t>(n) * terms);
  for (int i = 0; i < n; ++i) {
    fn(i, std::span<double>(jet));
    for (std::size_t k = 0; k < terms; ++k) {
      data[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = jet[k];
    }
  }
  return Coefficient::from_jets(s.grid, s.order, std::move(data));
}

}  // namespace

GridPtr common_grid(const GridPtr& a, const GridPtr& b) {
  if (!a) return b;
  if (!b) return a;
  if (a == b || *a == *b) return a;
  std::ostringstream msg;
  msg << "grid mismatch: [" << a->min << "," << a->max << "," << a->count << "] vs [" << b->min
      << "," << b->max << "," << b->count << "]";
  throw DimensionError(msg.str());
}

Coefficient::Coefficient(double value) : data_{value} {}

Coefficient Coefficient::from_jets(GridPtr grid, int order, std::vector<double> data) {
  if (!grid) throw ConfigurationError("field coefficient requires a grid");
  if (order < 0 ||
      data.size() != static_cast<std::size_t>(grid->count) * static_cast<std::size_t>(order + 1)) {
    throw DimensionError("jet storage does not match grid and order");
  }
  return Coefficient(std::move(grid), order, std::move(data));
}

Coefficient Coefficient::sampled(GridPtr grid, std::vector<double> values) {
  return from_jets(std::move(grid), 0, std::move(values));
}

Coefficient Coefficient::with_derivatives(GridPtr grid, std::vector<double> values,
                                          const std::vector<std::vector<double>>& derivs) {
  if (!grid) throw ConfigurationError("field coefficient requires a grid");
  const auto n = static_cast<std::size_t>(grid->count);
  if (values.size() != n) throw DimensionError("sample count does not match grid");
  const int order = static_cast<int>(derivs.size());
  std::vector<double> data(n * (derivs.size() + 1));
  std::copy(values.begin(), values.end(), data.begin());
  double factorial = 1.0;
  for (int k = 1; k <= order; ++k) {
    factorial *= k;
    const auto& d = derivs[static_cast<std::size_t>(k - 1)];
    if (d.size() != n) throw DimensionError("derivative sample count does not match grid");
    for (std::size_t i = 0; i < n; ++i) data[static_cast<std::size_t>(k) * n + i] = d[i] / factorial;
  }
  return from_jets(std::move(grid), order, std::move(data));
}

Coefficient Coefficient::coordinate(GridPtr grid, int order) {
  if (!grid) throw ConfigurationError("coordinate requires a grid");
  const auto n = static_cast<std::size_t>(grid->count);
  std::vector<double> data(n * static_cast<std::size_t>(order + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = grid->point(static_cast<int>(i));
    if (order >= 1) data[n + i] = 1.0;
  }
  return from_jets(std::move(grid), order, std::move(data));
}

double Coefficient::taylor(int k, int i) const {
  if (!grid_) return k == 0 ? data_[0] : 0.0;
  if (k > order_) throw ConfigurationError("jet order exceeded");
  return raw(k, i);
}

double Coefficient::derivative_value(int k, int i) const {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return taylor(k, i) * f;
}

std::vector<double> Coefficient::values() const {
  if (!grid_) return {data_[0]};
  return {data_.begin(), data_.begin() + grid_->count};
}

double Coefficient::min_value() const {
  if (!grid_) return data_[0];
  return *std::min_element(data_.begin(), data_.begin() + grid_->count);
}

double Coefficient::max_value() const {
  if (!grid_) return data_[0];
  return *std::max_element(data_.begin(), data_.begin() + grid_->count);
}

double Coefficient::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < size(); ++i) m = std::max(m, std::abs(value(i)));
  return m;
}

Coefficient Coefficient::at_sample(int i) const {
  if (!grid_) return *this;
  auto g = std::make_shared<Grid>(Grid{grid_->point(i), grid_->point(i), 1});
  std::vector<double> data(static_cast<std::size_t>(order_ + 1));
  for (int k = 0; k <= order_; ++k) data[static_cast<std::size_t>(k)] = raw(k, i);
  return Coefficient(std::move(g), order_, std::move(data));
}

Coefficient Coefficient::truncated(int order) const {
  if (!grid_ || order >= order_) return *this;
  const auto keep = static_cast<std::size_t>(grid_->count) * static_cast<std::size_t>(order + 1);
  return Coefficient(grid_, order,
                     std::vector<double>(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(keep)));
}

Coefficient& Coefficient::operator+=(const Coefficient& o) { return *this = *this + o; }
Coefficient& Coefficient::operator-=(const Coefficient& o) { return *this = *this - o; }
Coefficient& Coefficient::operator*=(const Coefficient& o) { return *this = *this * o; }

Coefficient operator+(const Coefficient& a, const Coefficient& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return b;
  const Shape s = binary_shape(a, b);
  std::vector<double> ja(static_cast<std::size_t>(std::min(s.order, 64) + 1));
  return build(s, [&](int i, std::span<double> out) {
    std::span<double> tmp(ja.data(), out.size());
    gather(a, i, out);
    gather(b, i, tmp);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += tmp[k];
  });
}

Coefficient operator-(const Coefficient& a) {
  if (a.is_zero()) return a;
  return build(unary_shape(a), [&](int i, std::span<double> out) {
    gather(a, i, out);
    for (double& v : out) v = -v;
  });
}

Coefficient operator-(const Coefficient& a, const Coefficient& b) {
  if (b.is_zero()) return a;
  return a + (-b);
}

Coefficient operator*(const Coefficient& a, const Coefficient& b) {
  if (a.is_zero() || b.is_zero()) return 0.0;
  if (a.is_constant() && a.value() == 1.0) return b;
  if (b.is_constant() && b.value() == 1.0) return a;
  const Shape s = binary_shape(a, b);
  std::vector<double> ja(static_cast<std::size_t>(std::min(s.order, 64) + 1));
  std::vector<double> jb(ja.size());
  return build(s, [&](int i, std::span<double> out) {
    std::span<double> x(ja.data(), out.size());
    std::span<double> y(jb.data(), out.size());
    gather(a, i, x);
    gather(b, i, y);
    for (std::size_t k = 0; k < out.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= k; ++j) acc += x[j] * y[k - j];
      out[k] = acc;
    }
  });
}

Coefficient operator/(const Coefficient& a, const Coefficient& b) {
  if (a.is_zero()) return 0.0;
  if (b.is_constant() && b.value() == 1.0) return a;
  const Shape s = binary_shape(a, b);
  std::vector<double> ja(static_cast<std::size_t>(std::min(s.order, 64) + 1));
  std::vector<double> jb(ja.size());
  return build(s, [&](int i, std::span<double> out) {
    std::span<double> x(ja.data(), out.size());
    std::span<double> y(jb.data(), out.size());
    gather(a, i, x);
    gather(b, i, y);
    if (y[0] == 0.0) throw ConfigurationError("division by zero coefficient");
    for (std::size_t k = 0; k < out.size(); ++k) {
      double acc = x[k];
      for (std::size_t j = 1; j <= k; ++j) acc -= y[j] * out[k - j];
      out[k] = acc / y[0];
    }
  });
}

Coefficient pow(const Coefficient& a, double r) {
  if (r == 0.0) return 1.0;
  if (r == 1.0) return a;
  if (a.is_zero() && r > 0.0) return 0.0;
  std::vector<double> ja(static_cast<std::size_t>(std::min(a.order(), 64) + 1));
  return build(unary_shape(a), [&](int i, std::span<double> out) {
    std::span<double> x(ja.data(), out.size());
    gather(a, i, x);
    const bool integral = std::round(r) == r;
    if ((x[0] < 0.0 && !integral) || (x[0] == 0.0 && (out.size() > 1 || r < 0.0))) {
      throw ConfigurationError("pow of non-positive coefficient");
    }
    out[0] = std::pow(x[0], r);
    for (std::size_t k = 1; k < out.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        acc += (r * static_cast<double>(j) - static_cast<double>(k - j)) * x[j] * out[k - j];
      }
      out[k] = acc / (static_cast<double>(k) * x[0]);
    }
  });
}

Coefficient sqrt(const Coefficient& a) { return pow(a, 0.5); }

Coefficient exp(const Coefficient& a) {
  std::vector<double> ja(static_cast<std::size_t>(std::min(a.order(), 64) + 1));
  return build(unary_shape(a), [&](int i, std::span<double> out) {
    std::span<double> x(ja.data(), out.size());
    gather(a, i, x);
    out[0] = std::exp(x[0]);
    for (std::size_t k = 1; k < out.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * x[j] * out[k - j];
      out[k] = acc / static_cast<double>(k);
    }
  });
}

Coefficient log(const Coefficient& a) {
  std::vector<double> ja(static_cast<std::size_t>(std::min(a.order(), 64) + 1));
  return build(unary_shape(a), [&](int i, std::span<double> out) {
    std::span<double> x(ja.data(), out.size());
    gather(a, i, x);
    if (x[0] <= 0.0) throw ConfigurationError("log of non-positive coefficient");
    out[0] = std::log(x[0]);
    for (std::size_t k = 1; k < out.size(); ++k) {
      double acc = static_cast<double>(k) * x[k];
      for (std::size_t j = 1; j < k; ++j) acc -= static_cast<double>(k - j) * x[j] * out[k - j];
      out[k] = acc / (static_cast<double>(k) * x[0]);
    }
  });
}

std::vector<double> fd_derivative(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  if (n < 5) throw ConfigurationError("finite differences need at least 5 grid points");
  std::vector<double> d(n);
  const double s = 1.0 / (12.0 * h);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) * s;
  }
  if (n == 5) {
    d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) * s;
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) * s;
    d[3] = (3.0 * v[4] + 10.0 * v[3] - 18.0 * v[2] + 6.0 * v[1] - v[0]) * s;
    d[4] = (25.0 * v[4] - 48.0 * v[3] + 36.0 * v[2] - 16.0 * v[1] + 3.0 * v[0]) * s;
    return d;
  }
  // Fifth-order one-sided closures keep repeated differences fourth order up to the boundary.
  const double b = 1.0 / (60.0 * h);
  auto left = [&](auto at) {
    return std::array<double, 2>{
        (-137.0 * at(0) + 300.0 * at(1) - 300.0 * at(2) + 200.0 * at(3) - 75.0 * at(4) + 12.0 * at(5)) * b,
        (-12.0 * at(0) - 65.0 * at(1) + 120.0 * at(2) - 60.0 * at(3) + 20.0 * at(4) - 3.0 * at(5)) * b};
  };
  const auto lo = left([&](std::size_t k) { return v[k]; });
  const auto hi = left([&](std::size_t k) { return v[n - 1 - k]; });
  d[0] = lo[0];
  d[1] = lo[1];
  d[n - 1] = -hi[0];
  d[n - 2] = -hi[1];
  return d;
}

std::vector<double> fd_second_derivative(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  if (n < 6) throw ConfigurationError("second differences need at least 6 grid points");
  std::vector<double> d(n);
  const double s = 1.0 / (12.0 * h * h);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) * s;
  }
  auto left = [&](auto at) {
    return std::array<double, 2>{
        (45.0 * at(0) - 154.0 * at(1) + 214.0 * at(2) - 156.0 * at(3) + 61.0 * at(4) - 10.0 * at(5)) * s,
        (10.0 * at(0) - 15.0 * at(1) - 4.0 * at(2) + 14.0 * at(3) - 6.0 * at(4) + at(5)) * s};
  };
  const auto lo = left([&](std::size_t k) { return v[k]; });
  const auto hi = left([&](std::size_t k) { return v[n - 1 - k]; });
  d[0] = lo[0];
  d[1] = lo[1];
  d[n - 1] = hi[0];
  d[n - 2] = hi[1];
  return d;
}

Coefficient du(const Coefficient& a) {
  if (a.is_constant()) return 0.0;
  const auto& grid = a.grid();
  const int n = grid->count;
  if (a.order() == 0) {
    const auto vals = a.values();
    return Coefficient::sampled(grid, fd_derivative(vals, grid->spacing()));
  }
  const int order = a.order() - 1;
  std::vector<double> data(static_cast<std::size_t>(n) * static_cast<std::size_t>(order + 1));
  for (int k = 0; k <= order; ++k) {
    for (int i = 0; i < n; ++i) {
      data[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
          static_cast<double>(k + 1) * a.taylor(k + 1, i);
    }
  }
  return Coefficient::from_jets(grid, order, std::move(data));
}

}  // namespace g2flow
