#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace g2flow {

/// Thrown when operands live on different frames, grids or degrees.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for invalid numeric configurations (missing grid, non-positive input to pow, ...).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid in the warping coordinate u.
struct Grid {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  [[nodiscard]] double spacing() const {
    return count > 1 ? (max - min) / static_cast<double>(count - 1) : 0.0;
  }
  [[nodiscard]] double point(int i) const { return min + spacing() * static_cast<double>(i); }
  friend bool operator==(const Grid&, const Grid&) = default;
};

using GridPtr = std::shared_ptr<const Grid>;

/// A scalar coefficient of a form: either an exact constant or a field sampled on a u-grid.
///
/// Fields optionally carry a truncated Taylor jet at every sample
/// (normalized coefficients f^(k)/k!, k = 0..order). Arithmetic propagates the
/// jet exactly, so u-derivatives of expressions built from analytic inputs are
/// exact up to round-off. A field with order 0 has values only; its derivative
/// falls back to 4th-order finite differences on the grid.
class Coefficient {
 public:
  Coefficient() = default;
  Coefficient(double value);  // NOLINT(google-explicit-constructor): constants mix freely

  /// Field with values only (derivatives by finite differences).
  static Coefficient sampled(GridPtr grid, std::vector<double> values);
  /// Field with analytic derivatives: derivs[k] holds the (k+1)-th derivative samples.
  static Coefficient with_derivatives(GridPtr grid, std::vector<double> values,
                                      const std::vector<std::vector<double>>& derivs);
  /// The coordinate u itself, carrying a jet of the given order (0 => FD mode).
  static Coefficient coordinate(GridPtr grid, int order);
  /// Raw jet storage: data[k * count + i] is the k-th normalized Taylor coefficient at sample i.
  static Coefficient from_jets(GridPtr grid, int order, std::vector<double> data);

  [[nodiscard]] bool is_constant() const { return !grid_; }
  [[nodiscard]] bool is_zero() const { return !grid_ && data_[0] == 0.0; }
  [[nodiscard]] const GridPtr& grid() const { return grid_; }
  /// Number of sample points (1 for constants).
  [[nodiscard]] int size() const { return grid_ ? grid_->count : 1; }
  /// Jet order; constants report a large sentinel since all derivatives are known.
  [[nodiscard]] int order() const { return grid_ ? order_ : kExactOrder; }

  [[nodiscard]] double value(int i = 0) const { return grid_ ? data_[static_cast<std::size_t>(i)] : data_[0]; }
  /// k-th normalized Taylor coefficient at sample i (k <= order()).
  [[nodiscard]] double taylor(int k, int i) const;
  /// k-th u-derivative at sample i (k <= order()).
  [[nodiscard]] double derivative_value(int k, int i) const;
  [[nodiscard]] std::vector<double> values() const;

  [[nodiscard]] double min_value() const;
  [[nodiscard]] double max_value() const;
  [[nodiscard]] double max_abs() const;

  /// Restrict to one sample: a one-point grid that keeps the jet.
  [[nodiscard]] Coefficient at_sample(int i) const;
  /// Drop jet information beyond the given order.
  [[nodiscard]] Coefficient truncated(int order) const;

  Coefficient& operator+=(const Coefficient& o);
  Coefficient& operator-=(const Coefficient& o);
  Coefficient& operator*=(const Coefficient& o);

  friend Coefficient operator+(const Coefficient& a, const Coefficient& b);
  friend Coefficient operator-(const Coefficient& a, const Coefficient& b);
  friend Coefficient operator*(const Coefficient& a, const Coefficient& b);
  friend Coefficient operator/(const Coefficient& a, const Coefficient& b);
  friend Coefficient operator-(const Coefficient& a);

  static constexpr int kExactOrder = 1 << 20;

 private:
  Coefficient(GridPtr grid, int order, std::vector<double> data)
      : grid_(std::move(grid)), order_(order), data_(std::move(data)) {}

  [[nodiscard]] double raw(int k, int i) const {
    return data_[static_cast<std::size_t>(k) * static_cast<std::size_t>(grid_->count) +
                 static_cast<std::size_t>(i)];
  }

  GridPtr grid_;
  int order_ = 0;
  std::vector<double> data_{0.0};
};

/// a^r for a > 0 at every sample.
Coefficient pow(const Coefficient& a, double r);
Coefficient sqrt(const Coefficient& a);
Coefficient exp(const Coefficient& a);
Coefficient log(const Coefficient& a);
/// Derivative in u: exact jet shift when analytic data exist, 4th-order FD otherwise.
Coefficient du(const Coefficient& a);

/// Common grid of two coefficients (null if both constant); throws on mismatch.
GridPtr common_grid(const GridPtr& a, const GridPtr& b);

/// 4th-order finite-difference first derivative on a uniform grid (count >= 5); 5th-order one-sided
/// closures at the two points next to each end when count >= 6.
std::vector<double> fd_derivative(std::span<const double> values, double h);
/// 4th-order second derivative on a uniform grid (count >= 6), one-sided 6-point closures.
std::vector<double> fd_second_derivative(std::span<const double> values, double h);

}  // namespace g2flow
