#include "g2flow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace g2flow {

namespace {

template <class T>
T rk4_combine(const T& y, double dt, const T& k1, const T& k2, const T& k3, const T& k4) {
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Runs body(begin, end) over [0, n) in up to `threads` contiguous chunks.
template <class Fn>
void parallel_for(int n, int threads, Fn&& body) {
  threads = std::clamp(threads, 1, std::max(1, n / 256));
  if (threads == 1) {
    body(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int b = 0; b < n; b += chunk) pool.emplace_back([&body, b, e = std::min(n, b + chunk)] { body(b, e); });
}

std::string at_time(double t) {
  std::ostringstream s;
  s << " at t = " << std::setprecision(10) << t;
  return s.str();
}

// ---------------------------------------------------------------------------
// AS helpers on raw samples

struct ASFields {
  std::vector<double> g, f, h, C;
};

ASFields recover(const std::vector<double>& A, const std::vector<double>& B, const std::vector<double>& C,
                 int threads) {
  const int n = static_cast<int>(A.size());
  ASFields out{std::vector<double>(A.size()), std::vector<double>(A.size()), std::vector<double>(A.size()), C};
  parallel_for(n, threads, [&](int b, int e) {
    for (int i = b; i < e; ++i) {
      const double g = std::cbrt(C[i] * B[i] / A[i]);
      out.g[i] = g;
      out.f[i] = std::sqrt(B[i] / g);
      out.h[i] = A[i] * g / B[i];
    }
  });
  return out;
}

bool all_positive(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x > 0.0; });
}

std::vector<double> axpy(const std::vector<double>& y, double a, const std::vector<double>& x) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * x[i];
  return out;
}

// ---------------------------------------------------------------------------
// Quotient state arithmetic for RK4

QuotientState operator+(const QuotientState& a, const QuotientState& b) {
  return {a.t, a.omega + b.omega, a.sigma + b.sigma, a.log_h + b.log_h, a.xi + b.xi};
}

QuotientState operator*(double s, const QuotientState& a) {
  return {a.t, s * a.omega, s * a.sigma, s * a.log_h, s * a.xi};
}

Form samples_only(const Form& a) {
  Form out = a;
  for (int s = 0; s < out.size(); ++s) {
    if (!out[s].is_constant()) out[s] = out[s].truncated(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evolution identity helpers

Form ddt(const Form& minus, const Form& plus, double dt) { return (0.5 / dt) * (plus - minus); }
Coefficient ddt(const Coefficient& minus, const Coefficient& plus, double dt) { return (0.5 / dt) * (plus - minus); }
Matrix ddt(const Matrix& minus, const Matrix& plus, double dt) { return (0.5 / dt) * (plus - minus); }

// T(ẽ_i, ẽ_j) on horizontal lifts ẽ_i = e_i − ξ_i e_y, i ≠ y.
Matrix horizontal_restriction(const Matrix& T, const Form& xi, int y) {
  Matrix out(6, 6);
  for (int i = 0, a = 0; i < 7; ++i) {
    if (i == y) continue;
    for (int j = 0, b = 0; j < 7; ++j) {
      if (j == y) continue;
      out(a, b) = T(i, j) - xi[j] * T(i, y) - xi[i] * T(y, j) + xi[i] * xi[j] * T(y, y);
      ++b;
    }
    ++a;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bryant

std::vector<BryantSample> closed_flow(const BryantFlowState& state, const FrameStructure& fs, double dt, int steps,
                                      int record_every) {
  if (!(dt > 0.0) || steps < 0 || record_every < 1) throw ConfigurationError("closed_flow: invalid step settings");
  if (state.phi.grid()) throw ConfigurationError("closed_flow needs constant coefficients");
  std::vector<BryantSample> out;
  auto sample = [&](double t, const Form& phi) {
    const G2Structure G = metric_from_phi(phi);
    const TorsionSolve ts = torsion_tau(G, fs);
    out.push_back({t, phi, norm2(ts.tau, G.g).value(), G.vol.top().value()});
  };
  auto rhs = [&](double t, const Form& phi) {
    try {
      return laplacian_closed(metric_from_phi(phi), fs);
    } catch (const StructureError& e) {
      throw FlowError(std::string("closed_flow: ") + e.what() + at_time(t));
    }
  };
  Form phi = state.phi;
  double t = state.t;
  sample(t, phi);
  for (int n = 1; n <= steps; ++n) {
    const Form k1 = rhs(t, phi);
    const Form k2 = rhs(t + 0.5 * dt, phi + (0.5 * dt) * k1);
    const Form k3 = rhs(t + 0.5 * dt, phi + (0.5 * dt) * k2);
    const Form k4 = rhs(t + dt, phi + dt * k3);
    phi = rk4_combine(phi, dt, k1, k2, k3, k4);
    t = state.t + dt * n;
    if (n % record_every == 0 || n == steps) sample(t, phi);
  }
  return out;
}

std::vector<BryantSample> bryant_flow(const BryantFlowState& state, double dt, int steps, int record_every) {
  return closed_flow(state, frame_from_key("fernandez7"), dt, steps, record_every);
}

// ---------------------------------------------------------------------------
// AS

ASFlowState as_state_from_profile(const ASProfile& p, double t) {
  const GridPtr grid = common_grid(common_grid(p.f.grid(), p.g.grid()), p.h.grid());
  if (!grid) throw ConfigurationError("AS profile must be sampled on a grid");
  auto values = [&](const Coefficient& c) {
    std::vector<double> v(static_cast<std::size_t>(grid->count));
    for (int i = 0; i < grid->count; ++i) v[static_cast<std::size_t>(i)] = c.value(i);
    return v;
  };
  return {t, grid, values(p.A()), values(p.B()), values(p.C())};
}

ASProfile as_recover_profile(const ASFlowState& s) {
  const ASFields r = recover(s.A, s.B, s.C, 1);
  return {Coefficient::sampled(s.grid, r.f), Coefficient::sampled(s.grid, r.g), Coefficient::sampled(s.grid, r.h)};
}

std::array<std::vector<double>, 2> as_rhs(const ASFlowState& s, int threads) {
  const double du = s.grid->spacing();
  const std::vector<double> C = fd_derivative(s.B, du);
  const ASFields r = recover(s.A, s.B, C, threads);
  const int n = static_cast<int>(s.A.size());
  std::vector<double> bg(s.A.size());
  for (int i = 0; i < n; ++i) bg[i] = s.B[i] * r.g[i];
  // ∂_t A = −∂_u((1/(hg²)) ∂_u(f²g²)) with hg² = C and f²g² = Bg, expanded so that no
  // difference operator is applied twice: −(Bg)''/C + (Bg)'·B''/C².
  const std::vector<double> p1 = fd_derivative(bg, du);
  const std::vector<double> p2 = fd_second_derivative(bg, du);
  const std::vector<double> b2 = fd_second_derivative(s.B, du);
  std::vector<double> at(s.A.size());
  for (int i = 0; i < n; ++i) at[i] = -p2[i] / C[i] + p1[i] * b2[i] / (C[i] * C[i]);
  // ∂_t B = 4g²(g/f² − f_u/(hf)).
  const std::vector<double> fu = fd_derivative(r.f, du);
  std::vector<double> bt(s.A.size());
  parallel_for(n, threads, [&](int b, int e) {
    for (int i = b; i < e; ++i) {
      const double g = r.g[i], f = r.f[i], h = r.h[i];
      bt[i] = 4.0 * g * g * (g / (f * f) - fu[i] / (h * f));
    }
  });
  return {std::move(at), std::move(bt)};
}

std::array<Coefficient, 2> as_profile_rhs(const ASProfile& p) {
  const Coefficient A = p.A();
  const Coefficient B = p.B();
  const Coefficient C = du(B);
  const Coefficient g = pow(C * B / A, 1.0 / 3.0);
  const Coefficient f = sqrt(B / g);
  const Coefficient h = A * g / B;
  return {-du(du(B * g) / C), 4.0 * g * g * (g / (f * f) - du(f) / (h * f))};
}

double as_cfl_limit(const ASFlowState& s, double cfl_safety) {
  const std::vector<double> C = fd_derivative(s.B, s.grid->spacing());
  const ASFields r = recover(s.A, s.B, C, 1);
  double dmax = 0.0;
  for (std::size_t i = 0; i < s.A.size(); ++i) {
    // Coefficients of A_uu in ∂_t A and of B_uu in ∂_t B.
    const double da = s.B[i] * r.g[i] / (3.0 * s.A[i] * C[i]);
    const double db = 2.0 * r.g[i] * r.g[i] / (3.0 * r.h[i] * C[i]);
    dmax = std::max({dmax, std::abs(da), std::abs(db)});
  }
  const double h = s.grid->spacing();
  return cfl_safety * h * h / dmax;
}

ASFlowReport as_flow(const ASFlowState& state, const ASFlowOptions& options, const ASBoundary& boundary) {
  const ASFlowState& s0 = state;
  if (!s0.grid || s0.grid->count < 6) throw ConfigurationError("as_flow needs a grid with at least 6 points");
  if (!(options.dt > 0.0) || options.steps < 0 || options.record_every < 1) {
    throw ConfigurationError("as_flow: invalid step settings");
  }
  if (!all_positive(s0.A) || !all_positive(s0.B) || !all_positive(s0.C)) {
    throw FlowError("as_flow: initial A, B, C must be positive");
  }
  ASFlowReport report;
  report.cfl_limit = as_cfl_limit(s0, options.cfl_safety);
  if (options.dt > report.cfl_limit) {
    std::ostringstream msg;
    msg << "as_flow: dt = " << options.dt << " exceeds the stability estimate " << report.cfl_limit;
    throw FlowError(msg.str());
  }
  const double du = s0.grid->spacing();
  const std::size_t last = s0.A.size() - 1;
  const double u0 = s0.grid->point(0);
  const double u1 = s0.grid->point(static_cast<int>(last));

  struct Vars {
    std::vector<double> A, B, Cm;
  };
  auto apply_boundary = [&](Vars& v, double t) {
    const auto lo = boundary(t, u0);
    const auto hi = boundary(t, u1);
    v.A[0] = lo[0];
    v.B[0] = lo[1];
    v.Cm[0] = lo[2];
    v.A[last] = hi[0];
    v.B[last] = hi[1];
    v.Cm[last] = hi[2];
  };
  auto rhs = [&](const Vars& v, double t) {
    ASFlowState s{t, s0.grid, v.A, v.B, {}};
    auto [at, bt] = as_rhs(s, options.threads);
    // (LF3') monitor: ∂_t C = ∂_u(∂_t B).
    std::vector<double> ct = fd_derivative(bt, du);
    return Vars{std::move(at), std::move(bt), std::move(ct)};
  };
  auto step = [&](const Vars& y, double a, const Vars& k, double t) {
    Vars out{axpy(y.A, a, k.A), axpy(y.B, a, k.B), axpy(y.Cm, a, k.Cm)};
    apply_boundary(out, t);
    return out;
  };
  auto record = [&](const Vars& v, double t) {
    ASFlowState s{t, s0.grid, v.A, v.B, fd_derivative(v.B, du)};
    double drift = 0.0;
    for (std::size_t i = 0; i <= last; ++i) drift = std::max(drift, std::abs(v.Cm[i] - s.C[i]));
    report.constraint_drift.push_back(drift);
    if (drift > options.drift_warning && report.warnings.empty()) {
      std::ostringstream msg;
      msg << "closure drift " << drift << at_time(t);
      report.warnings.push_back(msg.str());
    }
    report.states.push_back(std::move(s));
  };

  Vars y{s0.A, s0.B, s0.C};
  double t = s0.t;
  const double dt = options.dt;
  record(y, t);
  for (int n = 1; n <= options.steps; ++n) {
    const Vars k1 = rhs(y, t);
    const Vars k2 = rhs(step(y, 0.5 * dt, k1, t + 0.5 * dt), t + 0.5 * dt);
    const Vars k3 = rhs(step(y, 0.5 * dt, k2, t + 0.5 * dt), t + 0.5 * dt);
    const Vars k4 = rhs(step(y, dt, k3, t + dt), t + dt);
    for (std::size_t i = 0; i <= last; ++i) {
      y.A[i] += dt / 6.0 * (k1.A[i] + 2.0 * k2.A[i] + 2.0 * k3.A[i] + k4.A[i]);
      y.B[i] += dt / 6.0 * (k1.B[i] + 2.0 * k2.B[i] + 2.0 * k3.B[i] + k4.B[i]);
      y.Cm[i] += dt / 6.0 * (k1.Cm[i] + 2.0 * k2.Cm[i] + 2.0 * k3.Cm[i] + k4.Cm[i]);
    }
    t = s0.t + dt * n;
    apply_boundary(y, t);
    if (!all_positive(y.A) || !all_positive(y.B) || !all_positive(fd_derivative(y.B, du))) {
      throw FlowError("as_flow: A, B or C lost positivity" + at_time(t));
    }
    if (n % options.record_every == 0 || n == options.steps) record(y, t);
  }
  return report;
}

std::array<double, 3> as_self_similar(double k, double t, double u) {
  const double lambda = as_soliton_lambda(k);
  const double q = 1.0 + 2.0 / 3.0 * lambda * t;
  if (!(q > 0.0)) throw std::domain_error("self-similar solution has reached its singular time");
  const double c = std::pow(q, 1.5);
  const double us = u + 1.5 * as_soliton_speed(k) / lambda * std::log(q);
  const double F = std::exp(k * us);
  return {c * F / std::sqrt(k * F), c * F, c * k * F};
}

ASProfile as_self_similar_profile(double k, double t, const GridPtr& grid, int order) {
  const double lambda = as_soliton_lambda(k);
  const double q = 1.0 + 2.0 / 3.0 * lambda * t;
  if (!(q > 0.0)) throw std::domain_error("self-similar solution has reached its singular time");
  const double c3 = std::sqrt(q);  // c^{1/3}
  const Coefficient us = Coefficient::coordinate(grid, order) + 1.5 * as_soliton_speed(k) / lambda * std::log(q);
  return {c3 * std::pow(k, -0.25) * exp(0.25 * k * us), c3 * std::sqrt(k) * exp(0.5 * k * us), c3};
}

// ---------------------------------------------------------------------------
// Solitons

Form g2_soliton_residual(const G2Structure& G, const SolitonSpec& spec, const FrameStructure& fs) {
  return laplacian_closed(G, fs) - spec.lambda * G.phi - lie_derivative(spec.V, G.phi, fs);
}

std::array<Coefficient, 2> soliton_ode_residual(const Coefficient& F, const Coefficient& a, double lambda) {
  const Coefficient F1 = du(F);
  if (!(F.min_value() > 0.0) || !(F1.min_value() > 0.0)) throw std::domain_error("soliton ODE needs F > 0 and F' > 0");
  const Coefficient first = du(log(F * F * F1)) - lambda / du(log(F)) - a;
  const Coefficient root = sqrt(F1);
  const Coefficient second = du(du(F * root) / F1) + lambda * F / root + du(a * F / root);
  return {first, second};
}

// ---------------------------------------------------------------------------
// Quotient flow

QuotientState quotient_state(const ReductionData& R, double t) {
  return {t, R.su3.omega, sqrt(R.H) * R.su3.omega_minus, log(R.H), R.xi};
}

ReductionData quotient_data(const QuotientState& s, const FrameStructure& fs, int y) {
  if (!(std::isfinite(s.log_h.max_abs()))) throw FlowError("quotient flow: H is no longer finite" + at_time(s.t));
  const Coefficient H = exp(s.log_h);
  if (!(H.min_value() > 0.0)) throw FlowError("quotient flow: H <= 0" + at_time(s.t));
  const Form omega_minus = (1.0 / sqrt(H)) * s.sigma;
  const Form vol = wedge(wedge(s.omega, s.omega), s.omega) * (1.0 / 6.0);
  const Matrix J = hitchin_J(omega_minus, vol);
  const Form omega_plus = -apply_J(J, omega_minus);
  return reduction_from_quotient(s.omega, omega_plus, H, s.xi, fs, y);
}

QuotientState quotient_rhs(const QuotientState& s, const FrameStructure& fs, int y) {
  const ReductionData R = quotient_data(s, fs, y);
  const SU3Structure& S = R.su3;
  const Coefficient& H = R.H;
  const Coefficient th = norm2(R.tau_h, S.g);
  const Coefficient tv = norm2(R.tau_v, S.g);
  const Form dtv = d(R.tau_v, R.base);
  QuotientState out;
  out.t = s.t;
  out.omega = -dtv;
  out.sigma = ((1.0 / 3.0) * (pow(H, -1.5) * th + pow(H, 1.5) * tv)) * S.omega_minus -
              (1.0 / H) * hodge_star(d(R.tau_h, R.base) + wedge(R.dxi, R.tau_v), S.g);
  out.log_h = (1.0 / 6.0) * (th / (H * H) + H * tv) + 0.5 * inner(dtv, S.omega, S.g);
  out.xi = insert_index(-hodge_star(wedge(apply_J(S.J, dtv), pow(H, 1.5) * S.omega_minus), S.g), y);
  return out;
}

std::vector<QuotientSample> quotient_flow(const ReductionData& R0, const FrameStructure& fs, double dt, int steps,
                                          int record_every) {
  if (!(dt > 0.0) || steps < 0 || record_every < 1) throw ConfigurationError("quotient_flow: invalid step settings");
  const int y = R0.y;
  QuotientState s = quotient_state(R0);
  s.omega = samples_only(s.omega);
  s.sigma = samples_only(s.sigma);
  s.xi = samples_only(s.xi);
  if (!s.log_h.is_constant()) s.log_h = s.log_h.truncated(0);

  std::vector<QuotientSample> out;
  auto sample = [&](const QuotientState& q) {
    ReductionData R = quotient_data(q, fs, y);
    const Form phi = wedge(R.xi, insert_index(R.su3.omega, y)) + pow(R.H, 1.5) * insert_index(R.su3.omega_plus, y);
    out.push_back({q.t, std::move(R), phi});
  };
  sample(s);
  const double t0 = s.t;
  for (int n = 1; n <= steps; ++n) {
    const QuotientState k1 = quotient_rhs(s, fs, y);
    QuotientState s2 = s + (0.5 * dt) * k1;
    s2.t = s.t + 0.5 * dt;
    const QuotientState k2 = quotient_rhs(s2, fs, y);
    QuotientState s3 = s + (0.5 * dt) * k2;
    s3.t = s2.t;
    const QuotientState k3 = quotient_rhs(s3, fs, y);
    QuotientState s4 = s + dt * k3;
    s4.t = s.t + dt;
    const QuotientState k4 = quotient_rhs(s4, fs, y);
    s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s.t = t0 + dt * n;
    if (n % record_every == 0 || n == steps) sample(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evolution identities

ResidualTable evolution_identities(const std::array<Form, 3>& phi, double dt, const FrameStructure& fs,
                                   std::optional<int> y) {
  const std::array<G2Structure, 3> G{metric_from_phi(phi[0]), metric_from_phi(phi[1]), metric_from_phi(phi[2])};
  const G2Structure& M = G[1];
  const Form tau = torsion_tau(M, fs, 1e-6).tau;
  const std::array<Form, 2> tau_ends{torsion_tau(G[0], fs, 1e-6).tau, torsion_tau(G[2], fs, 1e-6).tau};
  const Form dtau = d(tau, fs);
  const Coefficient t2 = norm2(tau, M.g);
  ResidualTable t;

  t["dual"] = (ddt(G[0].psi, G[2].psi, dt) - ((1.0 / 3.0) * t2 * M.psi - hodge_star(dtau, M.g))).max_abs();
  t["volume"] = (ddt(G[0].vol, G[2].vol, dt) - (1.0 / 3.0) * t2 * M.vol).max_abs();
  const Matrix gdot = ddt(G[0].g.matrix(), G[2].g.matrix(), dt);
  t["metric"] = (gdot - ((-1.0 / 3.0) * t2 * M.g.matrix() + 0.5 * j_map(dtau, M))).max_abs();
  const Form taudot = ddt(tau_ends[0], tau_ends[1], dt);
  const Form rhs_tau = -wedge(tau, dtau) + (1.0 / 3.0) * wedge(d(scalar_form(7, t2), fs), M.psi) +
                       (1.0 / 3.0) * t2 * wedge(tau, M.phi) - d(hodge_star(dtau, M.g), fs);
  t["torsion"] = (wedge(taudot, M.phi) - rhs_tau).max_abs();
  if (!y) return t;

  const int yy = *y;
  const std::array<ReductionData, 3> R{reduce(G[0], fs, yy, 1e-6), reduce(G[1], fs, yy, 1e-6),
                                       reduce(G[2], fs, yy, 1e-6)};
  const ReductionData& Q = R[1];
  const SU3Structure& S = Q.su3;
  const FrameStructure& base = Q.base;
  const Coefficient& H = Q.H;
  const Coefficient h12 = sqrt(H);
  const Coefficient h32 = pow(H, 1.5);
  const Form omega2 = wedge(S.omega, S.omega);
  const Form vol = wedge(omega2, S.omega) * (1.0 / 6.0);
  const Form dH = d(scalar_form(6, H), base);
  const Form jgamma = apply_J(S.J, Q.gamma16);
  const Coefficient th = norm2(Q.tau_h, S.g);
  const Coefficient tv = norm2(Q.tau_v, S.g);
  const Form dtv = d(Q.tau_v, base);
  const Form X = d(Q.tau_h, base) + wedge(Q.dxi, Q.tau_v);
  // θ = d^c(H⁻¹) − H⁻²Jγ and K = dθ = dd^c(H⁻¹) − d(H⁻²Jγ).
  const Form theta = dc(1.0 / H, S, base) - (1.0 / (H * H)) * jgamma;
  const Form K = d(theta, base);
  const Coefficient gK = inner(K, S.omega, S.g);
  auto quot = [&](auto get) { return std::array{get(R[0]), get(R[2])}; };

  const auto omega_e = quot([](const ReductionData& r) { return r.su3.omega; });
  t["omega_flow"] = (ddt(omega_e[0], omega_e[1], dt) + dtv).max_abs();

  const auto sigma_e = quot([](const ReductionData& r) { return sqrt(r.H) * r.su3.omega_minus; });
  t["sigma_flow"] = (ddt(sigma_e[0], sigma_e[1], dt) -
                     ((1.0 / 3.0) * (pow(H, -1.5) * th + h32 * tv) * S.omega_minus - (1.0 / H) * hodge_star(X, S.g)))
                        .max_abs();

  const auto logh_e = quot([](const ReductionData& r) { return log(r.H); });
  const Coefficient logh_dot = ddt(logh_e[0], logh_e[1], dt);
  t["log_h_flow"] =
      (logh_dot - ((1.0 / 6.0) * (th / (H * H) + H * tv) + 0.5 * inner(dtv, S.omega, S.g))).max_abs();
  t["h_compact"] = (logh_dot - ((1.0 / 6.0) * t2 + gK)).max_abs();

  const auto h_e = quot([](const ReductionData& r) { return r.H; });
  const Coefficient lap = codifferential(dH, S, base)[0];
  const Coefficient h_rhs = -1.0 * lap / H - 2.0 / (H * H) * inner(dH, Q.gamma16, S.g) - norm2(dH, S.g) / (H * H) +
                            norm2(Q.tau8, S.g) / (6.0 * H) + 0.5 * norm2(Q.dxi8, S.g) / (H * H * H);
  t["h_expanded"] = (ddt(h_e[0], h_e[1], dt) - h_rhs).max_abs();

  const auto xi_e = quot([](const ReductionData& r) { return r.xi; });
  const Form xidot = ddt(xi_e[0], xi_e[1], dt);
  t["xi_flow"] =
      (xidot - insert_index(-hodge_star(wedge(apply_J(S.J, dtv), h32 * S.omega_minus), S.g), yy)).max_abs();
  t["xi_proposition"] =
      (xidot - insert_index(-2.0 * h32 * hodge_star(wedge(apply_J(S.J, K), S.omega_minus), S.g), yy)).max_abs();

  const auto vol_e = quot([](const ReductionData& r) {
    return wedge(wedge(r.su3.omega, r.su3.omega), r.su3.omega) * (1.0 / 6.0);
  });
  const Form voldot = ddt(vol_e[0], vol_e[1], dt);
  t["vol_omega"] = (voldot + d(wedge(theta, omega2), base)).max_abs();
  t["vol_omega_inner"] = (voldot + 2.0 * gK * vol).max_abs();

  const auto plus_e = quot([](const ReductionData& r) { return r.su3.omega_plus; });
  const Form plus_rhs =
      -1.0 * (0.25 * t2 + 1.5 * gK) * S.omega_plus +
      (1.0 / h32) * (d(codifferential(h12 * S.omega_plus, S, base), base) + 2.0 * wedge(Q.dxi, theta)) +
      2.0 * wedge(hodge_star(wedge(apply_J(S.J, K), S.omega_minus), S.g), S.omega);
  t["omega_plus"] = (ddt(plus_e[0], plus_e[1], dt) - plus_rhs).max_abs();

  const auto minus_e = quot([](const ReductionData& r) { return r.su3.omega_minus; });
  const Form minus_rhs =
      0.25 * (th / (H * H) + H * tv - 2.0 * gK) * S.omega_minus -
      (1.0 / h32) * (codifferential(d(h12 * S.omega_minus, base), S, base) + hodge_star(wedge(Q.dxi, 2.0 * theta), S.g));
  t["omega_minus"] = (ddt(minus_e[0], minus_e[1], dt) - minus_rhs).max_abs();

  const auto g_e = quot([](const ReductionData& r) { return r.su3.g.matrix(); });
  const Matrix gwdot = ddt(g_e[0], g_e[1], dt);
  const Matrix jp = horizontal_restriction(j_map(dtau, M), Q.xi, yy);
  const Coefficient logh_rhs = (1.0 / 6.0) * t2 + gK;
  t["g_omega_restricted"] =
      (gwdot - ((-1.0 * logh_rhs - (1.0 / 3.0) * t2) * S.g.matrix() + (0.5 / H) * jp)).max_abs();
  const SU3Split3 xs = decompose3_su3(X, S);
  const SU3Split2 vs = decompose2_su3(dtv, S);
  // dτ = X − ξ∧dτ_v, so the ξ∧(dτ_v) terms enter j(dτ)|_P with a minus sign; the printed
  // variant keeps +ξ∧(dτ_v)₈ and the matching ⅙ coefficient.
  const Coefficient gdtv = inner(dtv, S.omega, S.g);
  for (const double sign : {-1.0, 1.0}) {
    const Coefficient scal = -1.0 * (0.5 * t2 + (0.5 - sign / 3.0) * gdtv - 2.0 / h32 * xs.c_plus);
    const Form j_arg = insert_index(xs.gamma12, yy) + sign * wedge(Q.xi, insert_index(vs.alpha8, yy));
    const Matrix jr = horizontal_restriction(j_map(j_arg, M), Q.xi, yy);
    t[sign < 0 ? "g_omega" : "g_omega_printed"] = (gwdot - (scal * S.g.matrix() + (0.5 / H) * jr)).max_abs();
  }

  // Form-evolution identities for forms that stay in the stated subspaces.
  auto split2 = [](const ReductionData& r, const Form& a) { return decompose2_su3(a, r.su3); };
  {
    const auto a_e = quot([](const ReductionData& r) { return r.tau_h + r.dxi; });
    const SU3Split2 a = split2(Q, Q.tau_h + Q.dxi);
    t["form_lemma_1"] =
        (wedge(ddt(a_e[0], a_e[1], dt), omega2) - 4.0 * inner(K, a.alpha6 - a.alpha8, S.g) * vol).max_abs();
  }
  {
    const auto a_e = quot([](const ReductionData& r) { return r.su3.omega + r.dxi8; });
    const Form a = S.omega + Q.dxi8;
    t["form_lemma_2"] =
        (wedge(ddt(a_e[0], a_e[1], dt), S.omega_minus) - (1.0 / h32) * wedge(a, hodge_star(X, S.g))).max_abs();
  }
  {
    auto alpha = [](const ReductionData& r) {
      const Form x = d(r.tau_h, r.base);
      return r.su3.omega_plus + r.su3.omega_minus + decompose3_su3(x, r.su3).gamma12;
    };
    const auto a_e = quot(alpha);
    t["form_lemma_3"] = (wedge(ddt(a_e[0], a_e[1], dt), S.omega) - 2.0 * wedge(alpha(Q), K)).max_abs();
  }
  {
    auto alpha = [](const ReductionData& r) {
      const Form x = d(r.tau_h, r.base);
      return r.su3.omega_minus + wedge(r.gamma16, r.su3.omega) + decompose3_su3(x, r.su3).gamma12;
    };
    const auto a_e = quot(alpha);
    const Form lhs = wedge(ddt(a_e[0], a_e[1], dt), S.omega_minus);
    t["form_lemma_4"] = (lhs - (1.0 / h32) * wedge(alpha(Q), hodge_star(X, S.g))).max_abs();
    t["form_lemma_4_unstarred"] = (lhs - (1.0 / h32) * wedge(alpha(Q), X)).max_abs();
  }
  return t;
}

ResidualTable evolution_identity_checks(const std::vector<BryantSample>& trajectory, std::size_t middle,
                                        const FrameStructure& fs, std::optional<int> y) {
  if (middle == 0 || middle + 1 >= trajectory.size()) throw ConfigurationError("need samples on both sides");
  const double dt = trajectory[middle + 1].t - trajectory[middle].t;
  if (std::abs((trajectory[middle].t - trajectory[middle - 1].t) - dt) > 1e-12 * std::max(1.0, dt)) {
    throw ConfigurationError("evolution checks need equally spaced samples");
  }
  return evolution_identities({trajectory[middle - 1].phi, trajectory[middle].phi, trajectory[middle + 1].phi}, dt, fs,
                              y);
}

std::map<std::string, ConvergenceRow> convergence_study(const std::vector<ResidualTable>& tables, double exact_floor) {
  std::map<std::string, ConvergenceRow> out;
  if (tables.empty()) return out;
  for (const auto& [key, first] : tables.front()) {
    ConvergenceRow row;
    for (const auto& t : tables) row.residuals.push_back(t.at(key));
    row.exact = std::all_of(row.residuals.begin(), row.residuals.end(), [&](double r) { return r < exact_floor; });
    if (!row.exact && row.residuals.size() > 1) {
      row.order = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < row.residuals.size(); ++i) {
        row.order = std::min(row.order, std::log2(row.residuals[i] / row.residuals[i + 1]));
      }
    }
    out.emplace(key, std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

void write_bryant_csv(std::ostream& out, const std::vector<BryantSample>& trajectory) {
  out << std::setprecision(17);
  out << "t,e123,e145,tau2,vol\n";
  for (const auto& s : trajectory) {
    out << s.t << ',' << s.phi.coeff({0, 1, 2}).value() << ',' << s.phi.coeff({0, 3, 4}).value() << ',' << s.tau2
        << ',' << s.vol << '\n';
  }
}

void write_as_csv(std::ostream& out, const ASFlowReport& report) {
  out << std::setprecision(17);
  out << "t,u,A,B,C,f,g,h,drift\n";
  for (std::size_t k = 0; k < report.states.size(); ++k) {
    const ASFlowState& s = report.states[k];
    const ASFields r = recover(s.A, s.B, s.C, 1);
    for (std::size_t i = 0; i < s.A.size(); ++i) {
      out << s.t << ',' << s.grid->point(static_cast<int>(i)) << ',' << s.A[i] << ',' << s.B[i] << ',' << s.C[i]
          << ',' << r.f[i] << ',' << r.g[i] << ',' << r.h[i] << ',' << report.constraint_drift[k] << '\n';
    }
  }
}

}  // namespace g2flow
