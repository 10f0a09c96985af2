#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "g2flow/g2.hpp"
#include "g2flow/su3.hpp"

namespace g2flow {

/// Quotient data of a closed G2-structure invariant under the frame direction Y = e_y.
///
/// Forms on the quotient live on the 6-frame `base` obtained by dropping index y;
/// `xi` and `tau` live on the original 7-frame.
struct ReductionData {
  int y = 0;
  FrameStructure base;
  Coefficient H;  // ‖Y‖⁻¹
  Form xi;        // H² g(Y,·), so ξ(Y) = 1
  Form dxi;
  Form dxi6;
  Form dxi8;
  SU3Structure su3;
  Form gamma16;  // H^{-1/2} dξ₆∧ω = γ∧Ω⁺
  Form tau_h;
  Form tau6;
  Form tau8;
  Form tau_v;
  Form tau;  // τ_h + ξ∧τ_v on the 7-frame
};

using ResidualTable = std::map<std::string, double>;

/// Reduces G by Y = e_y. Throws StructureError if L_Yφ ≠ 0 ("not S¹-invariant"), if Y
/// has zero length ("action not free"), or if the reassembled torsion disagrees with
/// torsion_tau beyond tol (relative).
ReductionData reduce(const G2Structure& G, const FrameStructure& fs, int y, double tol = 1e-9);

/// Rebuilds the reduction from quotient data (ω, Ω⁺, H) and the connection form ξ on the
/// 7-frame; J and g_ω come from Hitchin's construction.
ReductionData reduction_from_quotient(const Form& omega, const Form& omega_plus, const Coefficient& H,
                                      const Form& xi, const FrameStructure& fs, int y);

/// Solves H^{-1/2} dξ₆∧ω = γ∧Ω⁺ for γ; throws StructureError if dξ₆ is not in Λ²₆.
Form gamma16_from_dxi(const Form& dxi6, const SU3Structure& S, const Coefficient& H, double tol = 1e-8);

/// Fills τ_h = d^*(H^{1/2}Ω⁺), its Λ²₆/Λ²₈ parts, τ_v = −2H⁻²(d^cH + Jγ) and τ.
void quotient_torsion(ReductionData& R);

/// Predicted curvature −*(d^*(H^{3/2}Ω⁻)∧ω) on the base frame.
Form gibbons_hawking_dxi(const SU3Structure& S, const Coefficient& H, const FrameStructure& base);

/// Top coefficient of d(H^{3/2}τ_h∧Ω⁺) − g_ω(dξ,τ_h)vol_ω.
Coefficient divergence_identity_residual(const ReductionData& R);

struct SolitonResidual {
  Form vertical;    // λω + d(τ_v + V⌟ω)
  Form horizontal;  // λH^{3/2}Ω⁺ − dτ_h − dξ∧(τ_v + V⌟ω) + d(H^{3/2}V⌟Ω⁺)
};
/// Residuals of the quotient soliton pair for a base vector field V.
SolitonResidual quotient_soliton_residual(const ReductionData& R, double lambda, const Vector& V);

/// Sup-norm residuals of every quotient identity (reconstruction, torsion relations,
/// norm identities, curvature formula). `G` is the structure that was reduced on `fs`.
ResidualTable reduction_identities(const ReductionData& R, const G2Structure& G, const FrameStructure& fs);

/// d^c f = J df for a function on the base.
Form dc(const Coefficient& f, const SU3Structure& S, const FrameStructure& base);
/// Codifferential −*d* on the base.
Form codifferential(const Form& a, const SU3Structure& S, const FrameStructure& base);
/// Function as a 0-form on an n-frame.
Form scalar_form(int n, const Coefficient& f);

nlohmann::json reduction_to_json(const ReductionData& R, const ResidualTable& residuals);

}  // namespace g2flow
