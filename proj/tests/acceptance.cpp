// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "g2flow/flows.hpp"
#include "test_support.hpp"

using namespace g2flow;
using g2flow::testing::random_form;

namespace {

// Tolerances, one block per criterion.
constexpr double kBryantE123Rel = 1e-6;
constexpr double kBryantTau2Abs = 1e-7;
constexpr double kBryantSeconds = 10.0;

constexpr double kSolitonAnalytic = 1e-10;
constexpr double kSolitonFD = 1e-6;
constexpr double kSolitonTau2 = 1e-9;

constexpr double kASRel = 1e-4;
constexpr double kASDrift = 1e-6;
constexpr double kASSeconds = 300.0;

constexpr double kRoundTrip = 1e-12;
constexpr double kQuoted = 1e-9;

constexpr double kIdentityAnalytic = 1e-9;
constexpr double kIdentityFD = 1e-6;
constexpr int kRandomInputs = 100;

constexpr double kMinOrder = 1.9;
constexpr double kExactFloor = 1e-9;

constexpr double kQuotientH = 1e-5;
constexpr double kQuotientOmega = 1e-10;
constexpr double kKaehler = 1e-8;

GridPtr grid(double a, double b, int n) { return std::make_shared<const Grid>(Grid{a, b, n}); }

double diff(const Form& a, const Form& b) { return (a - b).max_abs(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int n, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d %s: %s | %s\n", n, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Tracks the largest residual and where it came from.
struct Worst {
  double value = 0.0;
  std::string name;
  void add(double v, const std::string& n) {
    if (!(v <= value)) {
      value = v;
      name = n;
    }
  }
};

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto tr = bryant_flow({0.0, bryant_phi(1.0)}, 1e-3, 1000);
  const double secs = seconds_since(t0);
  double e123 = 0.0, tau2 = 0.0;
  for (const auto& s : tr) {
    const double q = 10.0 * s.t / 3.0 + 1.0;
    const double exact = std::pow(q, 0.6);
    e123 = std::max(e123, std::abs(s.phi.coeff({0, 1, 2}).value() - exact) / exact);
    tau2 = std::max(tau2, std::abs(s.tau2 - 2.0 / q));
  }
  const bool pass = tr.size() == 1001 && std::abs(tr.back().t - 1.0) < 1e-12 && e123 < kBryantE123Rel &&
                    tau2 < kBryantTau2Abs && secs < kBryantSeconds;
  report(1, "Bryant benchmark", pass,
         "e123 rel " + fmt("%.2e", e123) + ", tau2 abs " + fmt("%.2e", tau2) + ", " + fmt("%.2f", secs) + " s");
}

void criterion2() {
  const FrameStructure fs = frame_from_key("as7");
  bool pass = true;
  std::string detail;
  for (double k : {2.0, 1.0, 3.0}) {
    const G2Structure G = metric_from_phi(as_soliton_profile(k, grid(-1.0, 1.0, 21), 4).phi());
    const double lambda = as_soliton_lambda(k), a = as_soliton_speed(k);
    const double r = g2_soliton_residual(G, {lambda, frame_vector(7, 6, a)}, fs).max_abs();
    const Coefficient t2 = norm2(torsion_tau(G, fs).tau, G.g);
    const double te = std::max(std::abs(t2.max_value() - 13.5 * k * k), std::abs(t2.min_value() - 13.5 * k * k));
    const bool params = lambda == -4.5 * k * k && a == 7.5 * k;
    pass = pass && params && r < kSolitonAnalytic && te < kSolitonTau2;
    detail += "k=" + fmt("%.0f", k) + " res " + fmt("%.1e", r) + " tau2 " + fmt("%.1e", te) + "; ";
  }
  const G2Structure G = metric_from_phi(as_soliton_profile(2.0, grid(-1.0, 1.0, 2001), 0).phi());
  const double fd = g2_soliton_residual(G, {-18.0, frame_vector(7, 6, 15.0)}, fs).max_abs();
  pass = pass && fd < kSolitonFD;
  report(2, "soliton residual", pass, detail + "FD N=2001 res " + fmt("%.2e", fd));
}

void criterion3() {
  const double k = 2.0;
  const GridPtr g = grid(-1.0, 1.0, 2001);
  ASFlowOptions o;
  o.dt = 1e-6;
  o.steps = 10000;
  o.record_every = 1000;
  const auto t0 = std::chrono::steady_clock::now();
  const ASFlowReport rep = as_flow(as_state_from_profile(as_soliton_profile(k, g, 1)), o,
                                   [k](double t, double u) { return as_self_similar(k, t, u); });
  const double secs = seconds_since(t0);
  double err = 0.0, drift = 0.0;
  for (std::size_t r = 0; r < rep.states.size(); ++r) {
    const ASFlowState& s = rep.states[r];
    for (int i = 0; i < g->count; ++i) {
      const auto ex = as_self_similar(k, s.t, g->point(i));
      err = std::max({err, std::abs(s.A[i] - ex[0]) / ex[0], std::abs(s.B[i] - ex[1]) / ex[1],
                      std::abs(s.C[i] - ex[2]) / ex[2]});
    }
    drift = std::max(drift, rep.constraint_drift[r]);
  }
  const bool pass = std::abs(rep.states.back().t - 0.01) < 1e-12 && err < kASRel && drift < kASDrift && secs < kASSeconds;
  report(3, "AS self-similar flow", pass,
         "rel " + fmt("%.2e", err) + ", drift " + fmt("%.2e", drift) + ", " + fmt("%.1f", secs) + " s");
}

void criterion4() {
  double round = 0.0;
  Worst quoted;
  for (double t : {0.0, 1.0}) {
    const double f = bryant_f(t);
    const FrameStructure fs = frame_from_key("fernandez7");
    const G2Structure G = metric_from_phi(bryant_phi(f));
    const ReductionData R = reduce(G, fs, 5);
    const ResidualTable id = reduction_identities(R, G, fs);
    round = std::max({round, id.at("roundtrip_phi"), id.at("roundtrip_psi")});
    auto lift = [&](const Form& a) { return insert_index(a, R.y); };
    quoted.add(std::abs(R.H.value() - std::sqrt(f)), "Bryant H");
    quoted.add(diff(R.xi, Form::parse(7, "e6")), "Bryant xi");
    quoted.add(diff(lift(R.su3.omega), Form::parse(7, "-e17 + e24 - e35")), "Bryant omega");
    quoted.add(diff(lift(R.gamma16), Form::monomial(7, {4}, 0.5 * std::pow(f, -2.5))), "Bryant gamma");
    const Form e12 = Form::parse(7, "e12");
    const Form e47 = Form::monomial(7, {3, 6}, std::pow(f, -3.0));
    quoted.add(diff(lift(R.dxi6), 0.5 * (e12 - e47)), "Bryant dxi6");
    quoted.add(diff(lift(R.dxi8), 0.5 * (e12 + e47)), "Bryant dxi8");
  }
  {
    const ASProfile p = as_soliton_profile(2.0, grid(-1.0, 1.0, 5), 4);
    const FrameStructure fs = frame_from_key("as7");
    const G2Structure G = metric_from_phi(p.phi());
    const ReductionData R = reduce(G, fs, 5);
    const ResidualTable id = reduction_identities(R, G, fs);
    round = std::max({round, id.at("roundtrip_phi"), id.at("roundtrip_psi")});
    auto lift = [&](const Form& a) { return insert_index(a, R.y); };
    const Coefficient &f = p.f, &g = p.g, &h = p.h;
    const Form w2 = Form::parse(7, "e13 - e24"), w3 = Form::parse(7, "e14 + e23");
    const Form e5 = Form::parse(7, "e5"), duf = Form::parse(7, "e7");
    quoted.add((R.H - 1.0 / g).max_abs(), "AS H");
    quoted.add(diff(lift(R.su3.omega), g * g * h * wedge(duf, e5) + g * f * f * w2), "AS omega");
    quoted.add(diff(lift(R.gamma16), -1.0 * h / (f * f) * duf), "AS gamma");
    quoted.add(diff(lift(R.dxi6), w3), "AS dxi6");
    quoted.add(R.dxi8.max_abs(), "AS dxi8");
    quoted.add(R.tau8.max_abs(), "AS tau8");
    const TorsionClasses tc = su3_torsion_classes(R.su3, R.base);
    quoted.add(diff(lift(tc.pi1), du(log(pow(g, 2.5) * f * f)) * duf), "AS pi1");
  }
  report(4, "reduction round trip", round < kRoundTrip && quoted.value < kQuoted,
         "round trip " + fmt("%.1e", round) + ", quoted " + fmt("%.1e", quoted.value) + " (" + quoted.name + ")");
}

// Pointwise 2-form identity: vol-coefficient of α∧α∧φ equals 2‖α₇‖² − ‖α₁₄‖².
double two_form_identity(const G2Structure& G, std::mt19937_64& rng) {
  const Form alpha = random_form(rng, 7, 2);
  const G2Split2 p = decompose2_g2(alpha, G);
  return (wedge(wedge(alpha, alpha), G.phi).top() / G.vol.top() -
          (2.0 * norm2(p.alpha7, G.g) - norm2(p.alpha14, G.g)))
      .max_abs();
}

// Interchange identities for a 1-form on the quotient.
double interchange(const SU3Structure& T, std::mt19937_64& rng) {
  const Form alpha = random_form(rng, 6, 1);
  const Form ja = apply_J(T.J, alpha);
  const Form beta = hodge_star(wedge(alpha, T.omega_minus), T.g);
  const Form w2 = wedge(T.omega, T.omega);
  return std::max({diff(wedge(ja, T.omega_plus), wedge(alpha, T.omega_minus)),
                   diff(wedge(alpha, T.omega_minus), wedge(beta, T.omega)),
                   diff(wedge(beta, T.omega_minus), 2.0 * hodge_star(alpha, T.g)),
                   diff(wedge(beta, T.omega_plus), 2.0 * hodge_star(ja, T.g))});
}

const std::vector<std::string> kSuiteKeys{"norm_gamma", "norm_tau_split", "norm_tau_hv", "norm_tau6", "relation1",
                                          "t68",        "divergence",     "gibbons_hawking"};

void suite(const G2Structure& G, const FrameStructure& fs, int y, std::mt19937_64& rng, Worst& w, double tol) {
  const ReductionData R = reduce(G, fs, y, tol);
  const ResidualTable t = reduction_identities(R, G, fs);
  for (const auto& k : kSuiteKeys) w.add(t.at(k), k);
  w.add(interchange(R.su3, rng), "interchange");
  w.add(two_form_identity(G, rng), "two_form_norms");
}

void criterion5() {
  std::mt19937_64 rng(5);
  Worst analytic, fd;
  int accepted = 0;
  const Coefficient u = Coefficient::coordinate(grid(0.2, 0.6, 3), 4);
  for (int trial = 0; accepted < kRandomInputs && trial < 4 * kRandomInputs; ++trial) {
    const auto s = g2flow::testing::random_invariant_closed(rng, trial % 2 == 0, u);
    if (!s) continue;
    suite(s->G, s->fs, s->y, rng, analytic, kIdentityAnalytic);
    ++accepted;
  }
  for (double t : {0.0, 1.0}) {
    suite(metric_from_phi(bryant_phi(bryant_f(t))), frame_from_key("fernandez7"), 5, rng, analytic, kIdentityAnalytic);
  }
  const FrameStructure as = frame_from_key("as7");
  suite(metric_from_phi(as_soliton_profile(2.0, grid(-1.0, 1.0, 11), 4).phi()), as, 5, rng, analytic,
        kIdentityAnalytic);
  suite(metric_from_phi(as_soliton_profile(2.0, grid(-1.0, 1.0, 801), 0).phi()), as, 5, rng, fd, kIdentityFD);
  const bool pass = accepted == kRandomInputs && analytic.value < kIdentityAnalytic && fd.value < kIdentityFD;
  report(5, "identity suites", pass,
         std::to_string(accepted) + " random + examples, analytic " + fmt("%.1e", analytic.value) + " (" +
             analytic.name + "), FD " + fmt("%.1e", fd.value) + " (" + fd.name + ")");
}

void criterion6() {
  const FrameStructure fs = frame_from_key("fernandez7");
  const double t = 0.5;
  std::vector<ResidualTable> tables;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const auto tr = bryant_flow({t - dt, bryant_phi(bryant_f(t - dt))}, dt, 2);
    tables.push_back(evolution_identity_checks(tr, 1, fs, 5));
  }
  double min_order = 1e9;
  std::string worst;
  int exact = 0, rated = 0;
  for (const auto& [key, row] : convergence_study(tables, kExactFloor)) {
    // The printed variants are kept as references for the corrected identities.
    if (key == "g_omega_printed" || key == "form_lemma_4_unstarred") continue;
    if (row.exact) {
      ++exact;
      continue;
    }
    ++rated;
    if (row.order < min_order) {
      min_order = row.order;
      worst = key;
    }
  }
  report(6, "evolution identities", rated > 0 && min_order >= kMinOrder,
         std::to_string(rated) + " rated, " + std::to_string(exact) + " exact, min order " + fmt("%.3f", min_order) +
             " (" + worst + ")");
}

void criterion7() {
  const FrameStructure fern = frame_from_key("fernandez7");
  const ReductionData R = reduce(metric_from_phi(bryant_phi(1.0)), fern, 5);
  const auto q = quotient_flow(R, fern, 0.025, 40);
  double herr = 0.0, werr = 0.0;
  for (const auto& s : q) {
    herr = std::max(herr, std::abs(s.R.H.value() - std::pow(10.0 * s.t / 3.0 + 1.0, 0.1)));
    werr = std::max(werr, diff(s.R.su3.omega, R.su3.omega));
  }

  const FrameStructure as = frame_from_key("as7");
  const int n = 321;
  const double h = 2.0 / (n - 1), t_end = 1e-3;
  const ReductionData A = reduce(metric_from_phi(as_soliton_profile(2.0, grid(-1.0, 1.0, n), 4).phi()), as, 4);
  const int steps = static_cast<int>(std::ceil(t_end / (0.5 * h * h)));
  const auto qa = quotient_flow(A, as, t_end / steps, steps, steps);
  const TorsionClasses tc = su3_torsion_classes(qa.back().R.su3, qa.back().R.base);
  const double other = std::max({tc.sigma0.max_abs(), tc.pi0.max_abs(), tc.nu1.max_abs(), tc.pi2.max_abs(),
                                 tc.sigma2.max_abs(), tc.nu3.max_abs()});
  const bool pass = herr < kQuotientH && werr < kQuotientOmega && other < kKaehler && tc.pi1.max_abs() > 1.0;
  report(7, "quotient flow", pass,
         "Bryant H " + fmt("%.2e", herr) + ", omega " + fmt("%.1e", werr) + "; AS N=321 non-pi1 " + fmt("%.2e", other) +
             ", pi1 " + fmt("%.2f", tc.pi1.max_abs()));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                    criterion5, criterion6, criterion7};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
