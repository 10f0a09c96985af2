#include "g2flow/su3.hpp"

#include <cmath>

#include "g2flow/form_json.hpp"

namespace g2flow {

namespace {

int orientation_of(const Form& omega) {
  const Coefficient top = wedge(wedge(omega, omega), omega).top();
  if (top.min_value() > 0.0) return 1;
  if (top.max_value() < 0.0) return -1;
  throw StructureError("omega is degenerate somewhere");
}

Matrix symmetrized(const Matrix& m) {
  Matrix s(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) s(i, j) = (m(i, j) + m(j, i)) * 0.5;
  }
  return s;
}

}  // namespace

Matrix two_form_matrix(const Form& omega) {
  if (omega.degree() != 2) throw DimensionError("two_form_matrix expects a 2-form");
  const int n = omega.dim();
  Matrix w(n, n);
  const BasisTable& t = BasisTable::get(n, 2);
  for (int s = 0; s < t.size(); ++s) {
    const auto idx = t.indices(s);
    w(idx[0], idx[1]) = omega[s];
    w(idx[1], idx[0]) = -omega[s];
  }
  return w;
}

Matrix complex_structure(const Form& omega, const Metric& g) {
  Matrix j = g.inverse() * two_form_matrix(omega);
  j *= -1.0;
  return j;
}

SU3Structure su3_from_metric(const Form& omega, const Form& omega_plus, const Matrix& g) {
  if (omega.dim() != 6) throw DimensionError("SU(3) structures live on a 6-frame");
  SU3Structure s{omega, omega_plus, Form(), Matrix(), Metric(g, orientation_of(omega))};
  s.J = complex_structure(omega, s.g);
  s.omega_minus = hodge_star(omega_plus, s.g);
  return s;
}

SU3Structure su3_from_forms(const Form& omega, const Form& omega_plus) {
  if (omega.dim() != 6) throw DimensionError("SU(3) structures live on a 6-frame");
  const Form vol = wedge(wedge(omega, omega), omega) * (1.0 / 6.0);
  const Matrix J = hitchin_J(omega_plus, vol);
  return su3_from_metric(omega, omega_plus, symmetrized(two_form_matrix(omega) * J));
}

Matrix hitchin_J(const Form& rho, const Form& vol_hint) {
  if (rho.dim() != 6 || rho.degree() != 3 || vol_hint.degree() != 6) {
    throw DimensionError("hitchin_J expects a 3-form and a volume form on a 6-frame");
  }
  const IndexMask all = (1u << 6) - 1;
  const Coefficient inv_nu = 1.0 / vol_hint.top();
  Matrix K(6, 6);
  for (int a = 0; a < 6; ++a) {
    const Form eta = wedge(contract(a, rho), rho);
    for (int b = 0; b < 6; ++b) {
      const Coefficient& c = eta.at_mask(all & ~(1u << b));
      if (c.is_zero()) continue;
      K(b, a) = (b % 2 ? -1.0 : 1.0) * c * inv_nu;
    }
  }
  const Coefficient lambda = (K * K).trace() * (1.0 / 6.0);
  if (!(lambda.max_value() < 0.0)) throw StructureError("3-form is not stable");
  K *= -1.0 / sqrt(-lambda);
  return K;
}

Form apply_J(const Matrix& J, const Form& a) {
  const int k = a.degree();
  if (k == 0) return a;
  const Matrix c = compound(J, k);
  Form out(a.dim(), k);
  for (int I = 0; I < out.size(); ++I) {
    for (int K = 0; K < a.size(); ++K) {
      if (a[K].is_zero() || c(K, I).is_zero()) continue;
      out[I] += a[K] * c(K, I);
    }
  }
  return out;
}

SU3Split2 decompose2_su3(const Form& alpha, const SU3Structure& S) {
  if (alpha.degree() != 2 || alpha.dim() != S.omega.dim()) throw DimensionError("decompose2_su3 expects a 2-form");
  SU3Split2 out;
  out.c = inner(alpha, S.omega, S.g) * (1.0 / 3.0);
  out.alpha1 = out.c * S.omega;
  const Form r = alpha - out.alpha1;
  const Form l = hodge_star(wedge(r, S.omega), S.g);
  out.alpha6 = (r + l) * 0.5;
  out.alpha8 = (r - l) * 0.5;
  return out;
}

SU3Split3 decompose3_su3(const Form& gamma, const SU3Structure& S) {
  if (gamma.degree() != 3 || gamma.dim() != S.omega.dim()) throw DimensionError("decompose3_su3 expects a 3-form");
  SU3Split3 out;
  out.c_plus = inner(gamma, S.omega_plus, S.g) * 0.25;
  out.c_minus = inner(gamma, S.omega_minus, S.g) * 0.25;
  const int n = S.omega.dim();
  std::vector<Form> basis;
  for (int a = 0; a < n; ++a) basis.push_back(wedge(Form::monomial(n, {a}), S.omega));
  Matrix gram(n, n);
  Matrix rhs(n, 1);
  for (int a = 0; a < n; ++a) {
    rhs(a, 0) = inner(gamma, basis[static_cast<std::size_t>(a)], S.g);
    for (int b = a; b < n; ++b) {
      gram(a, b) = inner(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)], S.g);
      gram(b, a) = gram(a, b);
    }
  }
  const Matrix x = solve(gram, rhs);
  out.alpha = Form(n, 1);
  for (int a = 0; a < n; ++a) out.alpha[a] = x(a, 0);
  out.gamma6 = wedge(out.alpha, S.omega);
  out.gamma12 = gamma - out.c_plus * S.omega_plus - out.c_minus * S.omega_minus - out.gamma6;
  return out;
}

Form lambda26_to_lambda1(const Form& beta, const SU3Structure& S, double* residual) {
  const int n = S.omega.dim();
  std::vector<Form> images;
  for (int a = 0; a < n; ++a) images.push_back(hodge_star(wedge(Form::monomial(n, {a}), S.omega_plus), S.g));
  Matrix m(beta.size(), n);
  Matrix rhs(beta.size(), 1);
  for (int r = 0; r < beta.size(); ++r) {
    rhs(r, 0) = beta[r];
    for (int a = 0; a < n; ++a) m(r, a) = images[static_cast<std::size_t>(a)][r];
  }
  const Matrix x = least_squares(m, rhs);
  Form alpha(n, 1);
  Form fit(n, 2);
  for (int a = 0; a < n; ++a) {
    alpha[a] = x(a, 0);
    fit += x(a, 0) * images[static_cast<std::size_t>(a)];
  }
  if (residual) *residual = (fit - beta).max_abs();
  return alpha;
}

TorsionClasses su3_torsion_classes(const SU3Structure& S, const FrameStructure& fs, double tol) {
  TorsionClasses t;
  const Form domega = d(S.omega, fs);
  const Form dplus = d(S.omega_plus, fs);
  const Form dminus = d(S.omega_minus, fs);
  const Form omega2 = wedge(S.omega, S.omega);

  const SU3Split3 s1 = decompose3_su3(domega, S);
  t.sigma0 = s1.c_plus * (-2.0 / 3.0);
  t.pi0 = s1.c_minus * (2.0 / 3.0);
  t.nu1 = s1.alpha;
  t.nu3 = s1.gamma12;

  const SU3Split2 s2 = decompose2_su3(hodge_star(dplus, S.g), S);
  t.pi1 = lambda26_to_lambda1(s2.alpha6, S);
  t.pi2 = s2.alpha8;

  const SU3Split2 s3 = decompose2_su3(hodge_star(dminus, S.g), S);
  const Form jpi1 = lambda26_to_lambda1(s3.alpha6, S);
  t.sigma2 = s3.alpha8;

  const Form jpi1_expected = apply_J(S.J, t.pi1);
  t.pi1_consistency = (jpi1 - jpi1_expected).max_abs();

  t.residual_domega = (domega - (-1.5 * t.sigma0 * S.omega_plus + 1.5 * t.pi0 * S.omega_minus +
                                 wedge(t.nu1, S.omega) + t.nu3))
                          .max_abs();
  t.residual_domega_plus =
      (dplus - (t.pi0 * omega2 + wedge(t.pi1, S.omega_plus) - wedge(t.pi2, S.omega))).max_abs();
  t.residual_domega_minus =
      (dminus - (t.sigma0 * omega2 + wedge(jpi1_expected, S.omega_plus) - wedge(t.sigma2, S.omega))).max_abs();
  const double scale = std::max({1.0, domega.max_abs(), dplus.max_abs(), dminus.max_abs()});
  if (t.pi1_consistency > tol * scale) throw StructureError("not an SU(3)-structure torsion set");
  return t;
}

nlohmann::json torsion_classes_to_json(const TorsionClasses& t) {
  return {{"sigma0", coefficient_to_json(t.sigma0)},
          {"pi0", coefficient_to_json(t.pi0)},
          {"nu1", form_to_json(t.nu1)},
          {"pi1", form_to_json(t.pi1)},
          {"pi2", form_to_json(t.pi2)},
          {"sigma2", form_to_json(t.sigma2)},
          {"nu3", form_to_json(t.nu3)},
          {"residuals",
           {{"domega", t.residual_domega},
            {"domega_plus", t.residual_domega_plus},
            {"domega_minus", t.residual_domega_minus},
            {"pi1_consistency", t.pi1_consistency}}}};
}

SU3Structure standard_su3() {
  return su3_from_metric(Form::parse(6, "e12 + e34 + e56"), Form::parse(6, "e135 - e146 - e236 - e245"),
                         Matrix::identity(6));
}

}  // namespace g2flow
