#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "g2flow/form.hpp"

namespace g2flow {

/// Structure equations de^i of an invariant coframe, optionally with one element equal to du.
class FrameStructure {
 public:
  FrameStructure() = default;
  /// de[i] is the constant-coefficient 2-form de^i.
  FrameStructure(std::vector<Form> de, std::optional<int> u_index = std::nullopt, std::string name = {});

  [[nodiscard]] int dim() const { return static_cast<int>(de_.size()); }
  [[nodiscard]] const Form& de(int i) const { return de_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::optional<int> u_index() const { return u_index_; }
  [[nodiscard]] const std::string& name() const { return name_; }

  /// d(e^I) for the basis monomial in the given slot of Λ^k.
  [[nodiscard]] const Form& d_monomial(int k, int slot) const;
  /// Largest coefficient of d(de^i) over i; zero iff the Jacobi identity holds.
  [[nodiscard]] double jacobi_defect() const;
  /// Structure of the quotient by the frame direction y (y must not appear in any de^i, i ≠ y).
  /// Quotienting by the u direction leaves a frame without one.
  [[nodiscard]] FrameStructure quotient(int y) const;

 private:
  std::vector<Form> de_;
  std::optional<int> u_index_;
  std::string name_;
  std::vector<std::vector<Form>> d_table_;
};

/// Exterior derivative: invariant part from the structure constants plus du ∧ ∂_u on field coefficients.
Form d(const Form& a, const FrameStructure& fs);
/// Lie derivative by Cartan's formula d(V⌟a) + V⌟da.
Form lie_derivative(const Vector& v, const Form& a, const FrameStructure& fs);

/// Registered frames: "fernandez7", "as7", "flat7", "flat6".
FrameStructure frame_from_key(std::string_view key);
std::vector<std::string> frame_keys();

}  // namespace g2flow
