#include "g2flow/reduction.hpp"

#include <algorithm>
#include <cmath>

#include "g2flow/form_json.hpp"

namespace g2flow {

namespace {

// Drops e^y from a form that must be horizontal up to round-off.
Form horizontal(const Form& a, int y, const char* what) {
  const double vertical = contract(y, a).max_abs();
  if (vertical > 1e-10 * std::max(1.0, a.max_abs())) {
    throw StructureError(std::string(what) + " is not horizontal");
  }
  return drop_index(strip_index(a, y), y);
}

Form vol_omega(const SU3Structure& S) { return wedge(wedge(S.omega, S.omega), S.omega) * (1.0 / 6.0); }

// α with α∧factor = target, by least squares over the six 1-form basis images.
Form solve_one_form(const Form& target, const Form& factor, double* residual) {
  const int n = factor.dim();
  std::vector<Form> images;
  for (int a = 0; a < n; ++a) images.push_back(wedge(Form::monomial(n, {a}), factor));
  Matrix m(target.size(), n);
  Matrix rhs(target.size(), 1);
  for (int r = 0; r < target.size(); ++r) {
    rhs(r, 0) = target[r];
    for (int a = 0; a < n; ++a) m(r, a) = images[static_cast<std::size_t>(a)][r];
  }
  const Matrix x = least_squares(m, rhs);
  Form alpha(n, 1);
  Form fit(n, target.degree());
  for (int a = 0; a < n; ++a) {
    alpha[a] = x(a, 0);
    fit += x(a, 0) * images[static_cast<std::size_t>(a)];
  }
  *residual = (fit - target).max_abs();
  return alpha;
}

// Curvature, its SU(3) split and γ¹₆, then the torsion.
void complete(ReductionData& R, const FrameStructure& fs) {
  R.dxi = horizontal(d(R.xi, fs), R.y, "dxi");
  const SU3Split2 split = decompose2_su3(R.dxi, R.su3);
  R.dxi6 = split.alpha6;
  R.dxi8 = split.alpha8;
  R.gamma16 = gamma16_from_dxi(R.dxi6, R.su3, R.H);
  quotient_torsion(R);
}

double norm_mismatch(const Coefficient& a, const Coefficient& b) { return (a - b).max_abs(); }

}  // namespace

Form scalar_form(int n, const Coefficient& f) {
  Form out(n, 0);
  out[0] = f;
  return out;
}

Form dc(const Coefficient& f, const SU3Structure& S, const FrameStructure& base) {
  return apply_J(S.J, d(scalar_form(base.dim(), f), base));
}

Form codifferential(const Form& a, const SU3Structure& S, const FrameStructure& base) {
  return -hodge_star(d(hodge_star(a, S.g), base), S.g);
}

ReductionData reduce(const G2Structure& G, const FrameStructure& fs, int y, double tol) {
  if (fs.dim() != 7 || y < 0 || y >= 7) throw DimensionError("reduce expects a 7-frame and a frame direction");
  const Vector Y = frame_vector(7, y);
  const double lie = lie_derivative(Y, G.phi, fs).max_abs();
  if (lie > tol * std::max(1.0, G.phi.max_abs())) throw StructureError("not S¹-invariant");
  const Coefficient& gyy = G.g(y, y);
  if (!(gyy.min_value() > 0.0)) throw StructureError("action not free");

  ReductionData R;
  R.y = y;
  R.base = fs.quotient(y);
  R.H = pow(gyy, -0.5);
  const Coefficient H2 = R.H * R.H;
  R.xi = Form(7, 1);
  for (int i = 0; i < 7; ++i) R.xi[i] = i == y ? Coefficient(1.0) : H2 * G.g(y, i);

  const Form omega7 = contract(y, G.phi);
  const Form omega = horizontal(omega7, y, "omega");
  const Form omega_plus = horizontal(pow(R.H, -1.5) * (G.phi - wedge(R.xi, omega7)), y, "Omega+");

  const Coefficient inv_h = 1.0 / R.H;
  Matrix g_omega(6, 6);
  for (int i = 0, a = 0; i < 7; ++i) {
    if (i == y) continue;
    for (int j = 0, b = 0; j < 7; ++j) {
      if (j == y) continue;
      g_omega(a, b) = inv_h * (G.g(i, j) - R.xi[i] * R.xi[j] / H2);
      ++b;
    }
    ++a;
  }
  R.su3 = su3_from_metric(omega, omega_plus, g_omega);
  complete(R, fs);

  const Form direct = torsion_tau(G, fs).tau;
  const double mismatch = (R.tau - direct).max_abs();
  if (mismatch > tol * std::max(1.0, direct.max_abs())) {
    throw StructureError("reassembled torsion disagrees with the G2 torsion");
  }
  return R;
}

ReductionData reduction_from_quotient(const Form& omega, const Form& omega_plus, const Coefficient& H,
                                      const Form& xi, const FrameStructure& fs, int y) {
  if (fs.dim() != 7 || xi.dim() != 7 || xi.degree() != 1) throw DimensionError("xi must be a 1-form on the 7-frame");
  if (!(H.min_value() > 0.0)) throw StructureError("H must be positive");
  ReductionData R;
  R.y = y;
  R.base = fs.quotient(y);
  R.H = H;
  R.xi = xi;
  R.su3 = su3_from_forms(omega, omega_plus);
  complete(R, fs);
  return R;
}

Form gamma16_from_dxi(const Form& dxi6, const SU3Structure& S, const Coefficient& H, double tol) {
  const Form target = pow(H, -0.5) * wedge(dxi6, S.omega);
  double residual = 0.0;
  Form gamma = solve_one_form(target, S.omega_plus, &residual);
  if (residual > tol * std::max(1.0, target.max_abs())) throw StructureError("dxi6 not in Λ²₆");
  return gamma;
}

void quotient_torsion(ReductionData& R) {
  const SU3Structure& S = R.su3;
  R.tau_h = codifferential(sqrt(R.H) * S.omega_plus, S, R.base);
  const SU3Split2 split = decompose2_su3(R.tau_h, S);
  R.tau6 = split.alpha6;
  R.tau8 = split.alpha8;
  R.tau_v = (-2.0 / (R.H * R.H)) * (dc(R.H, S, R.base) + apply_J(S.J, R.gamma16));
  R.tau = insert_index(R.tau_h, R.y) + wedge(R.xi, insert_index(R.tau_v, R.y));
}

Form gibbons_hawking_dxi(const SU3Structure& S, const Coefficient& H, const FrameStructure& base) {
  const Form co = codifferential(pow(H, 1.5) * S.omega_minus, S, base);
  return -hodge_star(wedge(co, S.omega), S.g);
}

Coefficient divergence_identity_residual(const ReductionData& R) {
  const SU3Structure& S = R.su3;
  const Form lhs = d(pow(R.H, 1.5) * wedge(R.tau_h, S.omega_plus), R.base);
  return lhs.top() - inner(R.dxi, R.tau_h, S.g) * vol_omega(S).top();
}

SolitonResidual quotient_soliton_residual(const ReductionData& R, double lambda, const Vector& V) {
  const SU3Structure& S = R.su3;
  const Form vo = R.tau_v + contract(V, S.omega);
  SolitonResidual out;
  out.vertical = lambda * S.omega + d(vo, R.base);
  const Coefficient h32 = pow(R.H, 1.5);
  out.horizontal = lambda * h32 * S.omega_plus - d(R.tau_h, R.base) - wedge(R.dxi, vo) +
                   d(h32 * contract(V, S.omega_plus), R.base);
  return out;
}

ResidualTable reduction_identities(const ReductionData& R, const G2Structure& G, const FrameStructure& fs) {
  const SU3Structure& S = R.su3;
  const FrameStructure& base = R.base;
  const int y = R.y;
  const Coefficient& H = R.H;
  const Coefficient h12 = sqrt(H);
  const Coefficient h32 = pow(H, 1.5);
  const Coefficient inv_h = 1.0 / H;
  const Form omega2 = wedge(S.omega, S.omega);
  const Form vol = vol_omega(S);
  const Form dH = d(scalar_form(6, H), base);
  const Form dcH = dc(H, S, base);
  const Form jgamma = apply_J(S.J, R.gamma16);
  const Form domega_minus = d(S.omega_minus, base);
  ResidualTable t;

  // Reconstruction of φ, *φ and g_φ.
  const Form xi = R.xi;
  const Form omega7 = insert_index(S.omega, y);
  t["roundtrip_phi"] = (wedge(xi, omega7) + h32 * insert_index(S.omega_plus, y) - G.phi).max_abs();
  t["roundtrip_psi"] = ((0.5 * H * H) * wedge(omega7, omega7) -
                        wedge(xi, h12 * insert_index(S.omega_minus, y)) - G.psi)
                           .max_abs();
  double metric = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      Coefficient v = xi[i] * xi[j] / (H * H);
      if (i != y && j != y) v += H * S.g(i < y ? i : i - 1, j < y ? j : j - 1);
      metric = std::max(metric, (v - G.g(i, j)).max_abs());
    }
  }
  t["roundtrip_metric"] = metric;
  t["hitchin_J"] = (hitchin_J(S.omega_plus, vol) - S.J).max_abs();

  // Closure on the quotient.
  t["domega"] = d(S.omega, base).max_abs();
  t["closure"] = (d(h32 * S.omega_plus, base) + wedge(R.dxi, S.omega)).max_abs();
  t["curvature_omega2"] = wedge(R.dxi, omega2).max_abs();
  t["dxi_split"] = (R.dxi - R.dxi6 - R.dxi8).max_abs();
  t["dxi8_omega2"] = wedge(R.dxi8, omega2).max_abs();
  t["dxi8_omega_plus"] = wedge(R.dxi8, S.omega_plus).max_abs();
  t["dxi6_eigen"] = (hodge_star(wedge(R.dxi6, S.omega), S.g) - R.dxi6).max_abs();

  // Torsion relations.
  t["tau_vs_g2"] = (R.tau - torsion_tau(G, fs).tau).max_abs();
  t["noomega"] = wedge(R.tau_h, omega2).max_abs();
  t["relation1"] = (wedge(R.tau_v, (0.5 * h32) * omega2) - wedge(R.tau_h, S.omega_minus)).max_abs();
  t["relation2"] = ((H * wedge(dH, omega2)) - wedge(R.dxi6, h12 * S.omega_minus) -
                    wedge(R.tau6, h32 * S.omega_plus))
                       .max_abs();
  t["tau6_lemma"] = (-2.0 * R.tau6 - h32 * hodge_star(wedge(R.tau_v, S.omega_plus), S.g)).max_abs();
  t["tau6_formula"] = (R.tau6 - (1.0 / h12) * hodge_star(wedge(dcH + jgamma, S.omega_plus), S.g)).max_abs();
  t["tau8_formula"] = (R.tau8 + h12 * hodge_star(domega_minus, S.g) +
                       hodge_star(wedge((1.0 / h12) * (1.5 * dcH + jgamma), S.omega_plus), S.g))
                          .max_abs();
  t["gamma16_definition"] =
      (wedge(R.gamma16, S.omega_plus) - (1.0 / h12) * wedge(R.dxi6, S.omega)).max_abs();
  t["t68"] = (wedge(d(R.tau6, base), S.omega) - wedge(d(R.tau8, base), S.omega)).max_abs();
  t["codifferential_tau_h"] = codifferential(R.tau_h, S, base).max_abs();
  t["omplus_torsion"] = (d(S.omega_plus, base) -
                         wedge(-1.5 * inv_h * dH - inv_h * R.gamma16, S.omega_plus) +
                         (1.0 / h32) * wedge(R.dxi8, S.omega))
                            .max_abs();
  const Form beta6 = -0.5 * R.tau_v;
  t["omminus_torsion"] = (domega_minus - wedge(H * (R.tau_v + beta6) - (0.5 * inv_h) * dcH, S.omega_plus) -
                          (1.0 / h12) * wedge(R.tau8, S.omega))
                             .max_abs();
  t["divergence"] = divergence_identity_residual(R).max_abs();
  t["divergence_tau6"] = (wedge(d(R.tau_h, base), h32 * S.omega_plus).top() -
                          2.0 * inner(R.dxi, R.tau6, S.g) * vol.top())
                             .max_abs();
  t["gibbons_hawking"] = (gibbons_hawking_dxi(S, H, base) - R.dxi).max_abs();

  // Norm identities.
  const Coefficient tau2 = norm2(R.tau, G.g);
  const Coefficient n6 = norm2(R.tau6, S.g);
  const Coefficient n8 = norm2(R.tau8, S.g);
  const Coefficient h_2 = 1.0 / (H * H);
  t["norm_gamma"] = norm_mismatch(norm2(R.gamma16, S.g), 0.5 * inv_h * norm2(R.dxi6, S.g));
  t["norm_tau_split"] = norm_mismatch(tau2, h_2 * (n8 + 3.0 * n6));
  t["norm_tau_hv"] = norm_mismatch(tau2, h_2 * norm2(R.tau_h, S.g) + H * norm2(R.tau_v, S.g));
  t["norm_tau6"] = norm_mismatch(n6, 2.0 * inv_h * norm2(dH + R.gamma16, S.g));
  t["norm_domega_minus"] =
      norm_mismatch(norm2(domega_minus, S.g),
                    inv_h * n8 + h_2 * (4.5 * norm2(dH, S.g) + 2.0 * norm2(R.gamma16, S.g) +
                                        6.0 * inner(dH, R.gamma16, S.g)));
  return t;
}

nlohmann::json reduction_to_json(const ReductionData& R, const ResidualTable& residuals) {
  nlohmann::json j;
  j["y"] = R.y + 1;
  j["base_frame"] = R.base.name();
  j["H"] = coefficient_to_json(R.H);
  j["xi"] = form_to_json(R.xi);
  j["omega"] = form_to_json(R.su3.omega);
  j["omega_plus"] = form_to_json(R.su3.omega_plus);
  j["omega_minus"] = form_to_json(R.su3.omega_minus);
  j["g_omega"] = matrix_to_json(R.su3.g.matrix());
  j["dxi6"] = form_to_json(R.dxi6);
  j["dxi8"] = form_to_json(R.dxi8);
  j["gamma16"] = form_to_json(R.gamma16);
  j["tau_h"] = form_to_json(R.tau_h);
  j["tau6"] = form_to_json(R.tau6);
  j["tau8"] = form_to_json(R.tau8);
  j["tau_v"] = form_to_json(R.tau_v);
  j["tau"] = form_to_json(R.tau);
  j["residuals"] = residuals;
  return j;
}

}  // namespace g2flow
