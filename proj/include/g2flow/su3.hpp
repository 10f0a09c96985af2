#pragma once

#include "json.hpp"

#include "g2flow/frame.hpp"
#include "g2flow/g2.hpp"
#include "g2flow/metric.hpp"

namespace g2flow {

/// SU(3)-structure on a 6-frame with g(X,Y) = ω(X,JY) and Ω⁻ = *Ω⁺.
struct SU3Structure {
  Form omega;
  Form omega_plus;
  Form omega_minus;
  Matrix J;  // endomorphism, J(e_b) = Σ_a J(a,b) e_a
  Metric g;
};

/// Antisymmetric matrix W(a,b) = ω(e_a, e_b).
Matrix two_form_matrix(const Form& omega);
/// Complex structure J = −g⁻¹W determined by ω and a compatible metric.
Matrix complex_structure(const Form& omega, const Metric& g);
/// Builds the structure from ω, Ω⁺ and the metric; orientation follows the sign of ω³.
SU3Structure su3_from_metric(const Form& omega, const Form& omega_plus, const Matrix& g);
/// Builds the structure from (ω, Ω⁺) alone, with J from hitchin_J and g = ω(·,J·).
SU3Structure su3_from_forms(const Form& omega, const Form& omega_plus);

/// Hitchin's almost complex structure of a stable 3-form ρ relative to the volume form ν.
/// Normalized so that Re((e1+ie2)∧(e3+ie4)∧(e5+ie6)) with ν = e^{1..6} gives J e1 = e2.
Matrix hitchin_J(const Form& rho, const Form& vol_hint);
/// Pullback action (Jα)(v1,..,vk) = α(Jv1,..,Jvk).
Form apply_J(const Matrix& J, const Form& a);

struct SU3Split2 {
  Coefficient c;  // α₁ = c·ω
  Form alpha1;
  Form alpha6;
  Form alpha8;
};
SU3Split2 decompose2_su3(const Form& alpha, const SU3Structure& S);

struct SU3Split3 {
  Coefficient c_plus;
  Coefficient c_minus;
  Form alpha;  // γ₆ = α∧ω
  Form gamma6;
  Form gamma12;
};
SU3Split3 decompose3_su3(const Form& gamma, const SU3Structure& S);

/// The unique α ∈ Λ¹ with *(α∧Ω⁺) = β for β ∈ Λ²₆; `residual` receives the sup-norm misfit.
Form lambda26_to_lambda1(const Form& beta, const SU3Structure& S, double* residual = nullptr);

struct TorsionClasses {
  Coefficient sigma0;
  Coefficient pi0;
  Form nu1;
  Form pi1;
  Form pi2;
  Form sigma2;
  Form nu3;
  double residual_domega = 0.0;
  double residual_domega_plus = 0.0;
  double residual_domega_minus = 0.0;
  /// Mismatch between Jπ₁ read from dΩ⁻ and J applied to π₁ read from dΩ⁺.
  double pi1_consistency = 0.0;
};
/// Throws StructureError if the π₁ consistency check fails beyond tol.
TorsionClasses su3_torsion_classes(const SU3Structure& S, const FrameStructure& fs, double tol = 1e-6);

nlohmann::json torsion_classes_to_json(const TorsionClasses& t);

/// Standard flat model ω = e12+e34+e56, Ω⁺ = Re((e1+ie2)(e3+ie4)(e5+ie6)).
SU3Structure standard_su3();

}  // namespace g2flow
