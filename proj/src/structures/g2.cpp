#include "g2flow/g2.hpp"

#include <algorithm>
#include <cmath>

namespace g2flow {

namespace {

double relative_scale(const Form& a) { return std::max(1.0, a.max_abs()); }

// Column s of the matrix holds the coefficients of image(s).
template <class Fn>
Matrix linear_map_matrix(int n, int k_in, int k_out, Fn&& image) {
  const int rows = BasisTable::get(n, k_out).size();
  const int cols = BasisTable::get(n, k_in).size();
  Matrix m(rows, cols);
  for (int s = 0; s < cols; ++s) {
    Form e(n, k_in);
    e[s] = 1.0;
    const Form img = image(e);
    for (int r = 0; r < rows; ++r) m(r, s) = img[r];
  }
  return m;
}

}  // namespace

Form standard_phi() { return Form::parse(7, "e123 + e145 + e167 + e246 - e257 - e347 - e356"); }

G2Structure metric_from_phi(const Form& phi) {
  if (phi.dim() != 7 || phi.degree() != 3) throw DimensionError("G2 structure needs a 3-form on a 7-frame");
  std::vector<Form> c;
  c.reserve(7);
  for (int i = 0; i < 7; ++i) c.push_back(contract(i, phi));
  Matrix B(7, 7);
  for (int i = 0; i < 7; ++i) {
    for (int j = i; j < 7; ++j) {
      const Coefficient b = wedge(wedge(c[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(j)]), phi).top() * (1.0 / 6.0);
      B(i, j) = b;
      B(j, i) = b;
    }
  }
  const Coefficient det = determinant(B);
  if (!(det.min_value() > 0.0)) throw StructureError("not a positive 3-form");
  const Coefficient scale = pow(det, -1.0 / 9.0);
  Matrix g = B;
  g *= scale;
  G2Structure G{phi, B, Metric(g, 1), Form(7, 7), Form()};
  G.vol[0] = pow(det, 1.0 / 9.0);
  G.psi = hodge_star(phi, G.g);
  return G;
}

G2Split2 decompose2_g2(const Form& alpha, const G2Structure& G) {
  if (alpha.degree() != 2 || alpha.dim() != 7) throw DimensionError("decompose2_g2 expects a 2-form on a 7-frame");
  const Form t = hodge_star(wedge(alpha, G.phi), G.g);
  return {(alpha + t) * (1.0 / 3.0), (2.0 * alpha - t) * (1.0 / 3.0)};
}

G2Split3 decompose3_g2(const Form& gamma, const G2Structure& G) {
  if (gamma.degree() != 3 || gamma.dim() != 7) throw DimensionError("decompose3_g2 expects a 3-form on a 7-frame");
  G2Split3 out;
  out.gamma1 = (inner(gamma, G.phi, G.g) * (1.0 / 7.0)) * G.phi;
  std::vector<Form> basis;
  for (int a = 0; a < 7; ++a) basis.push_back(contract(a, G.psi));
  Matrix gram(7, 7);
  Matrix rhs(7, 1);
  for (int a = 0; a < 7; ++a) {
    rhs(a, 0) = inner(gamma, basis[static_cast<std::size_t>(a)], G.g);
    for (int b = a; b < 7; ++b) {
      gram(a, b) = inner(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)], G.g);
      gram(b, a) = gram(a, b);
    }
  }
  const Matrix x = solve(gram, rhs);
  out.u.assign(7, Coefficient(0.0));
  out.gamma7 = Form(7, 3);
  for (int a = 0; a < 7; ++a) {
    out.u[static_cast<std::size_t>(a)] = x(a, 0);
    out.gamma7 += x(a, 0) * basis[static_cast<std::size_t>(a)];
  }
  out.gamma27 = gamma - out.gamma1 - out.gamma7;
  return out;
}

TorsionSolve torsion_tau(const G2Structure& G, const FrameStructure& fs, double tol) {
  const Form rhs_form = d(G.psi, fs);
  const Matrix L = linear_map_matrix(7, 2, 5, [&](const Form& e) { return wedge(e, G.phi); });
  Matrix rhs(rhs_form.size(), 1);
  for (int r = 0; r < rhs_form.size(); ++r) rhs(r, 0) = rhs_form[r];
  const Matrix x = solve(L, rhs);
  TorsionSolve out;
  out.tau = Form(7, 2);
  for (int s = 0; s < out.tau.size(); ++s) out.tau[s] = x(s, 0);
  out.residual = (wedge(out.tau, G.phi) - rhs_form).max_abs();
  out.lambda7_part = decompose2_g2(out.tau, G).alpha7.max_abs();
  if (out.lambda7_part > tol * relative_scale(out.tau) || out.residual > tol * relative_scale(rhs_form)) {
    throw StructureError("phi not closed or torsion system inconsistent");
  }
  return out;
}

Form laplacian_closed(const G2Structure& G, const FrameStructure& fs) { return d(torsion_tau(G, fs).tau, fs); }

Form laplacian_direct(const G2Structure& G, const FrameStructure& fs) {
  return d(-hodge_star(d(G.psi, fs), G.g), fs);
}

Matrix j_map(const Form& gamma, const G2Structure& G) {
  if (gamma.degree() != 3 || gamma.dim() != 7) throw DimensionError("j expects a 3-form on a 7-frame");
  std::vector<Form> c;
  for (int i = 0; i < 7; ++i) c.push_back(contract(i, G.phi));
  const Coefficient inv_vol = 1.0 / G.vol.top();
  Matrix j(7, 7);
  for (int a = 0; a < 7; ++a) {
    const Form ca_gamma = wedge(c[static_cast<std::size_t>(a)], gamma);
    for (int b = a; b < 7; ++b) {
      const Coefficient v = wedge(c[static_cast<std::size_t>(b)], ca_gamma).top() * inv_vol;
      j(a, b) = v;
      j(b, a) = v;
    }
  }
  return j;
}

}  // namespace g2flow
