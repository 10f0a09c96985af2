#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2flow/examples.hpp"
#include "g2flow/g2.hpp"
#include "g2flow/reduction.hpp"

namespace g2flow {

/// Numeric abort of a flow run (positivity loss, non-finite values, step-size violation).
class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Bryant flow on the Fernández nilmanifold

struct BryantFlowState {
  double t = 0.0;
  Form phi;  // constant coefficients on fernandez7
};

struct BryantSample {
  double t = 0.0;
  Form phi;
  double tau2 = 0.0;  // ‖τ‖²
  double vol = 0.0;   // coefficient of vol_φ
};

/// Classical RK4 on ∂_tφ = dτ for a constant-coefficient closed φ on `fs`. Records the
/// initial state, every `record_every` steps and the last step.
std::vector<BryantSample> closed_flow(const BryantFlowState& state, const FrameStructure& fs, double dt, int steps,
                                      int record_every = 1);
/// closed_flow on the fernandez7 frame.
std::vector<BryantSample> bryant_flow(const BryantFlowState& state, double dt, int steps, int record_every = 1);

// ---------------------------------------------------------------------------
// AS ansatz flow in the variables A = f²h, B = gf², C = g²h = ∂_u B

struct ASFlowState {
  double t = 0.0;
  GridPtr grid;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> C;
};

/// Exact values (A, B, C) at (t, u), used for Dirichlet data.
using ASBoundary = std::function<std::array<double, 3>(double t, double u)>;

struct ASFlowOptions {
  double dt = 1e-6;
  int steps = 0;
  int record_every = 1;
  /// dt must satisfy dt ≤ cfl_safety·Δu²/D_max, D_max the largest diffusion coefficient.
  double cfl_safety = 0.8;
  /// Drift of C − ∂_u B above this adds a warning.
  double drift_warning = 1e-6;
  int threads = 1;
};

struct ASFlowReport {
  std::vector<ASFlowState> states;
  /// max |C_mon − ∂_u B| per recorded state, C_mon evolved separately by ∂_t C = ∂_u(∂_t B).
  std::vector<double> constraint_drift;
  double cfl_limit = 0.0;
  std::vector<std::string> warnings;
};

ASFlowState as_state_from_profile(const ASProfile& p, double t = 0.0);
/// (f, g, h) from (A, B, C): g = (CB/A)^{1/3}, f² = B/g, h = Ag/B.
ASProfile as_recover_profile(const ASFlowState& s);
/// Right-hand sides (∂_t A, ∂_t B) with C = ∂_u B by 4th-order differences.
std::array<std::vector<double>, 2> as_rhs(const ASFlowState& s, int threads = 1);
/// The same right-hand sides evaluated on a profile with u-derivatives from du, so analytic
/// jets (order >= 3) give the exact values; C is taken as ∂_u B.
std::array<Coefficient, 2> as_profile_rhs(const ASProfile& p);
/// Largest stable step estimate cfl_safety·Δu²/D_max for the current state.
double as_cfl_limit(const ASFlowState& s, double cfl_safety = 0.8);
ASFlowReport as_flow(const ASFlowState& state, const ASFlowOptions& options, const ASBoundary& boundary);

/// Self-similar solution (1 + ⅔λt)^{3/2} F_t^*φ₀ of the k-soliton, F_t the flow of (1 + ⅔λt)^{-1} V.
std::array<double, 3> as_self_similar(double k, double t, double u);
/// The same solution as a profile on a grid, with analytic derivatives of the given order.
ASProfile as_self_similar_profile(double k, double t, const GridPtr& grid, int order);

// ---------------------------------------------------------------------------
// Solitons

struct SolitonSpec {
  double lambda = 0.0;
  Vector V;
};

/// Δφ − λφ − L_Vφ for closed φ.
Form g2_soliton_residual(const G2Structure& G, const SolitonSpec& spec, const FrameStructure& fs);

/// Residuals of the (F, a) soliton ODE pair with h = 1. Throws std::domain_error if F' ≤ 0.
std::array<Coefficient, 2> soliton_ode_residual(const Coefficient& F, const Coefficient& a, double lambda);

// ---------------------------------------------------------------------------
// Quotient flow of (ω, H^{1/2}Ω⁻, log H, ξ)

struct QuotientState {
  double t = 0.0;
  Form omega;
  Form sigma;  // H^{1/2}Ω⁻
  Coefficient log_h;
  Form xi;  // on the 7-frame
};

struct QuotientSample {
  double t = 0.0;
  ReductionData R;
  Form phi;  // ξ∧ω + H^{3/2}Ω⁺ on the 7-frame
};

QuotientState quotient_state(const ReductionData& R, double t = 0.0);
/// Reduction data rebuilt from a quotient state; J comes from Hitchin's construction on Ω⁻.
ReductionData quotient_data(const QuotientState& s, const FrameStructure& fs, int y);
/// Time derivative of the quotient state.
QuotientState quotient_rhs(const QuotientState& s, const FrameStructure& fs, int y);
/// RK4 on the quotient system. Field coefficients are evolved as samples (finite differences in u).
std::vector<QuotientSample> quotient_flow(const ReductionData& R, const FrameStructure& fs, double dt, int steps,
                                          int record_every = 1);

// ---------------------------------------------------------------------------
// Evolution identities

/// Central differences in t of the evolving quantities at the middle of three consecutive
/// closed structures, compared with the stated right-hand sides. With `y`, the quotient
/// identities are included as well.
ResidualTable evolution_identities(const std::array<Form, 3>& phi, double dt, const FrameStructure& fs,
                                   std::optional<int> y);

/// The same table for the samples around index `middle` of a Bryant trajectory.
ResidualTable evolution_identity_checks(const std::vector<BryantSample>& trajectory, std::size_t middle,
                                        const FrameStructure& fs, std::optional<int> y);

struct ConvergenceRow {
  std::vector<double> residuals;
  /// Smallest log2 ratio between consecutive residuals; 0 when exact.
  double order = 0.0;
  /// Every residual below the exact floor.
  bool exact = false;
};
/// Observed orders from residual tables computed with step sizes halved from one table to the next.
std::map<std::string, ConvergenceRow> convergence_study(const std::vector<ResidualTable>& tables,
                                                        double exact_floor = 1e-9);

// ---------------------------------------------------------------------------
// Output

void write_bryant_csv(std::ostream& out, const std::vector<BryantSample>& trajectory);
/// One row per recorded state and grid point: t, u, A, B, C, f, g, h, drift.
void write_as_csv(std::ostream& out, const ASFlowReport& report);

}  // namespace g2flow
