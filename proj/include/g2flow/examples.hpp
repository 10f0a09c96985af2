#pragma once

#include "g2flow/form.hpp"

namespace g2flow {

/// f³e123 + e145 + e167 + e246 − e257 − e347 − e356 on the fernandez7 frame.
Form bryant_phi(const Coefficient& f);
/// f(t) = (10t/3 + 1)^{1/5} of the exact Bryant solution.
double bryant_f(double t);

/// φ = −A ω₁∧du + C e56∧du − B(ω₃∧e5 − ω₂∧e6) on the as7 frame.
Form as_phi(const Coefficient& A, const Coefficient& B, const Coefficient& C);

/// Profile functions (f, g, h) of the AS ansatz.
struct ASProfile {
  Coefficient f;
  Coefficient g;
  Coefficient h;
  [[nodiscard]] Coefficient A() const { return f * f * h; }
  [[nodiscard]] Coefficient B() const { return g * f * f; }
  [[nodiscard]] Coefficient C() const { return g * g * h; }
  [[nodiscard]] Form phi() const { return as_phi(A(), B(), C()); }
};

/// Gradient soliton with F = f²g = e^{ku}, h = 1; λ = −9k²/2 and V = (15k/2)∂_u.
ASProfile as_soliton_profile(double k, const GridPtr& grid, int order);
double as_soliton_lambda(double k);
double as_soliton_speed(double k);
/// Torsion-free profile f = (3u)^{1/3}, g = (3u)^{−1/3}, h = 1 (needs u > 0).
ASProfile as_torsion_free_profile(const GridPtr& grid, int order);

/// Standard 3-form on the flat 7-frame.
Form flat_phi();

}  // namespace g2flow
