#include <cmath>
#include <random>

#include "doctest.h"
#include "g2flow/examples.hpp"
#include "g2flow/reduction.hpp"
#include "test_support.hpp"

using namespace g2flow;
using g2flow::testing::closed_profile;
using g2flow::testing::random_form;

namespace {

double diff(const Form& a, const Form& b) { return (a - b).max_abs(); }

GridPtr grid(double a, double b, int n) { return std::make_shared<const Grid>(Grid{a, b, n}); }

double worst(const ResidualTable& t, std::string* name = nullptr) {
  double w = 0.0;
  for (const auto& [k, v] : t) {
    if (v >= w) {
      w = v;
      if (name) *name = k;
    }
  }
  return w;
}

// Base-frame form written with 7-frame labels.
Form lift(const ReductionData& R, const Form& a) { return insert_index(a, R.y); }

}  // namespace

TEST_CASE("Bryant reduction reproduces the quoted quotient data") {
  for (double t : {0.0, 1.0}) {
    const double f = bryant_f(t);
    const FrameStructure fs = frame_from_key("fernandez7");
    const G2Structure G = metric_from_phi(bryant_phi(f));
    const ReductionData R = reduce(G, fs, 5);
    CHECK(std::abs(R.H.value() - std::sqrt(f)) < 1e-12);
    CHECK(diff(R.xi, Form::parse(7, "e6")) < 1e-12);
    CHECK(diff(lift(R, R.su3.omega), Form::parse(7, "-e17 + e24 - e35")) < 1e-12);
    const Form op = Form::monomial(7, {0, 1, 2}, std::pow(f, 2.25)) +
                    std::pow(f, -0.75) * Form::parse(7, "e145 - e257 - e347");
    CHECK(diff(lift(R, R.su3.omega_plus), op) < 1e-12);
    const Form om = Form::monomial(7, {3, 4, 6}, -std::pow(f, -2.25)) -
                    std::pow(f, 0.75) * Form::parse(7, "e237 + e125 + e134");
    CHECK(diff(lift(R, R.su3.omega_minus), om) < 1e-12);
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(R.su3.g(i, i).value() - (i < 3 ? std::pow(f, 1.5) : std::pow(f, -1.5))) < 1e-12);
    }
    CHECK(diff(lift(R, R.gamma16), Form::monomial(7, {4}, 0.5 * std::pow(f, -2.5))) < 1e-12);
    const Form e12 = Form::parse(7, "e12");
    const Form e47 = Form::monomial(7, {3, 6}, std::pow(f, -3.0));
    CHECK(diff(lift(R, R.dxi6), 0.5 * (e12 - e47)) < 1e-12);
    CHECK(diff(lift(R, R.dxi8), 0.5 * (e12 + e47)) < 1e-12);
    CHECK(R.tau6.max_abs() > 1e-3);
    CHECK(R.tau8.max_abs() > 1e-3);

    const Coefficient hv = norm2(R.tau_h, R.su3.g) / (R.H * R.H) + R.H * norm2(R.tau_v, R.su3.g);
    CHECK(std::abs(hv.value() - 2.0 * std::pow(f, -5.0)) < 1e-12);
    CHECK(diff(gibbons_hawking_dxi(R.su3, R.H, R.base), R.dxi) < 1e-12);
    CHECK(std::abs(divergence_identity_residual(R).value()) < 1e-10);

    std::string name;
    const double w = worst(reduction_identities(R, G, fs), &name);
    INFO("worst identity: " << name);
    CHECK(w < 1e-10);
  }
}

TEST_CASE("AS reduction reproduces the quoted quotient data") {
  auto gr = grid(-1.0, 1.0, 5);
  const ASProfile p = as_soliton_profile(2.0, gr, 4);
  const FrameStructure fs = frame_from_key("as7");
  const G2Structure G = metric_from_phi(p.phi());
  const ReductionData R = reduce(G, fs, 5);
  const Coefficient &f = p.f, &g = p.g, &h = p.h;
  const Coefficient f2 = f * f;

  CHECK((R.H - 1.0 / g).max_abs() < 1e-12);
  CHECK(diff(R.xi, Form::parse(7, "e6")) < 1e-12);
  const Form w1 = Form::parse(7, "e12 + e34");
  const Form w2 = Form::parse(7, "e13 - e24");
  const Form w3 = Form::parse(7, "e14 + e23");
  const Form e5 = Form::parse(7, "e5");
  const Form duf = Form::parse(7, "e7");
  CHECK(diff(lift(R, R.su3.omega), g * g * h * wedge(duf, e5) + g * f2 * w2) < 1e-12);
  CHECK(diff(lift(R, R.su3.omega_plus),
             -1.0 * f2 * h * pow(g, 1.5) * wedge(w1, duf) - pow(g, 2.5) * f2 * wedge(w3, e5)) < 1e-12);
  CHECK(diff(lift(R, R.su3.omega_minus),
             -1.0 * f2 * pow(g, 2.5) * wedge(w1, e5) + pow(g, 1.5) * h * f2 * wedge(w3, duf)) < 1e-12);
  for (int i = 0; i < 6; ++i) {
    const Coefficient expected = i < 4 ? g * f2 : (i == 4 ? g * g * g : h * h * g);
    CHECK((R.su3.g(i, i) - expected).max_abs() < 1e-12);
  }
  CHECK(diff(lift(R, R.gamma16), -1.0 * h / f2 * duf) < 1e-12);
  CHECK(diff(lift(R, R.dxi), w3) < 1e-12);
  CHECK(diff(lift(R, R.dxi6), w3) < 1e-12);
  CHECK(R.dxi8.max_abs() < 1e-12);
  CHECK(R.tau8.max_abs() < 1e-12);
  CHECK(diff(lift(R, gibbons_hawking_dxi(R.su3, R.H, R.base)), w3) < 1e-12);

  const TorsionClasses tc = su3_torsion_classes(R.su3, R.base);
  CHECK(diff(lift(R, tc.pi1), du(log(pow(g, 2.5) * f2)) * duf) < 1e-11);
  for (const Form* other : {&tc.nu1, &tc.pi2, &tc.sigma2, &tc.nu3}) CHECK(other->max_abs() < 1e-11);
  CHECK(tc.sigma0.max_abs() < 1e-11);
  CHECK(tc.pi0.max_abs() < 1e-11);

  std::string name;
  const double w = worst(reduction_identities(R, G, fs), &name);
  INFO("worst identity: " << name);
  CHECK(w < 1e-9);
}

TEST_CASE("AS closed family torsion matches the closed-form torsion") {
  auto gr = grid(0.3, 1.1, 5);
  const Coefficient u = Coefficient::coordinate(gr, 4);
  const ASProfile p = closed_profile(1.0 + 0.3 * u * u, exp(0.4 * u));
  const ReductionData R = reduce(metric_from_phi(p.phi()), frame_from_key("as7"), 5);
  const Coefficient &f = p.f, &g = p.g, &h = p.h;
  const Form expected = du(f * f * g * g) / (h * g * g) * Form::parse(7, "e12 + e34") +
                        4.0 * (g * g * g / (f * f) - g * g * du(f) / (f * h)) * Form::parse(7, "e56");
  CHECK(diff(R.tau, expected) < 1e-11);
  CHECK(R.tau8.max_abs() < 1e-12);
}

TEST_CASE("torsion-free quotients") {
  auto gr = grid(1.0, 2.0, 5);
  const ReductionData R = reduce(metric_from_phi(as_torsion_free_profile(gr, 4).phi()), frame_from_key("as7"), 5);
  CHECK(R.tau_h.max_abs() < 1e-12);
  CHECK(R.tau_v.max_abs() < 1e-12);

  const FrameStructure flat = frame_from_key("flat7");
  const G2Structure G = metric_from_phi(flat_phi());
  const ReductionData F = reduce(G, flat, 6);
  CHECK(F.H.value() == doctest::Approx(1.0));
  CHECK(F.tau.max_abs() == 0.0);
  CHECK(F.gamma16.max_abs() == 0.0);
  CHECK(gibbons_hawking_dxi(F.su3, F.H, F.base).max_abs() == 0.0);
  const TorsionClasses tc = su3_torsion_classes(F.su3, F.base);
  CHECK(tc.pi1.max_abs() == 0.0);
  const SolitonResidual s = quotient_soliton_residual(F, 0.0, Vector(6, Coefficient(0.0)));
  CHECK(s.vertical.max_abs() == 0.0);
  CHECK(s.horizontal.max_abs() == 0.0);
}

TEST_CASE("reduce rejects non-invariant directions and free-ness failures") {
  const FrameStructure fs = frame_from_key("fernandez7");
  // e1 is not central: L_{e1} moves e6 and e7.
  CHECK_THROWS_AS(reduce(metric_from_phi(bryant_phi(1.0)), fs, 0), StructureError);
  auto gr = grid(-1.0, 1.0, 5);
  const ASProfile p = as_soliton_profile(2.0, gr, 3);
  CHECK_THROWS_AS(reduce(metric_from_phi(p.phi()), frame_from_key("as7"), 0), StructureError);
}

TEST_CASE("quotient soliton equations on the AS shrinker") {
  auto gr = grid(-1.0, 1.0, 7);
  const ASProfile p = as_soliton_profile(2.0, gr, 4);
  const FrameStructure fs = frame_from_key("as7");
  const ReductionData R = reduce(metric_from_phi(p.phi()), fs, 5);
  const Vector V = frame_vector(6, 5, 15.0);
  const SolitonResidual s = quotient_soliton_residual(R, -18.0, V);
  CHECK(s.vertical.max_abs() < 1e-9);
  CHECK(s.horizontal.max_abs() < 1e-9);

  const ReductionData P = reduction_from_quotient(R.su3.omega, R.su3.omega_plus, 1.01 * R.H, R.xi, fs, 5);
  const SolitonResidual sp = quotient_soliton_residual(P, -18.0, V);
  CHECK(std::max(sp.vertical.max_abs(), sp.horizontal.max_abs()) > 1e-3);

  const ReductionData Q = reduction_from_quotient(R.su3.omega, R.su3.omega_plus, R.H, R.xi, fs, 5);
  CHECK(diff(Q.tau, R.tau) < 1e-11);
  CHECK((Q.su3.g.matrix() - R.su3.g.matrix()).max_abs() < 1e-11);
}

TEST_CASE("AS identities with finite-difference derivatives") {
  auto gr = grid(-1.0, 1.0, 801);
  const ASProfile p = as_soliton_profile(2.0, gr, 0);
  const FrameStructure fs = frame_from_key("as7");
  const G2Structure G = metric_from_phi(p.phi());
  const ReductionData R = reduce(G, fs, 5, 1e-6);
  CHECK(std::abs(divergence_identity_residual(R).max_abs()) < 1e-6);
  std::string name;
  const double w = worst(reduction_identities(R, G, fs), &name);
  INFO("worst identity: " << name);
  CHECK(w < 1e-6);
}

TEST_CASE("closure splits into dω = 0 and d(H^{3/2}Ω⁺) = −dξ∧ω") {
  // Non-closed AS profile: h is free.
  auto gr = grid(0.5, 1.0, 5);
  const Coefficient u = Coefficient::coordinate(gr, 3);
  const FrameStructure fs = frame_from_key("as7");
  for (const bool closed : {true, false}) {
    ASProfile p = closed_profile(exp(0.2 * u), 1.0 + u);
    if (!closed) p.h = 1.0 + 0.5 * u;
    const G2Structure G = metric_from_phi(p.phi());
    const int y = 5;
    const Coefficient H = pow(G.g(y, y), -0.5);
    Form xi(7, 1);
    for (int i = 0; i < 7; ++i) xi[i] = i == y ? Coefficient(1.0) : H * H * G.g(y, i);
    const Form omega7 = contract(y, G.phi);
    const Form plus7 = pow(H, -1.5) * (G.phi - wedge(xi, omega7));
    const bool quotient_closed = d(omega7, fs).max_abs() < 1e-12 &&
                                 (d(pow(H, 1.5) * plus7, fs) + wedge(d(xi, fs), omega7)).max_abs() < 1e-12;
    CHECK((d(G.phi, fs).max_abs() < 1e-12) == closed);
    CHECK(quotient_closed == closed);
  }
}

TEST_CASE("quotient identities on randomized invariant closed structures") {
  std::mt19937_64 rng(2024);
  auto gr = grid(0.2, 0.6, 3);
  const Coefficient u = Coefficient::coordinate(gr, 4);
  int accepted = 0;
  double worst_all = 0.0;
  std::string worst_name;
  for (int trial = 0; accepted < 100 && trial < 400; ++trial) {
    const auto sample = g2flow::testing::random_invariant_closed(rng, trial % 2 == 0, u);
    if (!sample) continue;
    const ReductionData R = reduce(sample->G, sample->fs, sample->y);
    ++accepted;
    std::string name;
    const double w = worst(reduction_identities(R, sample->G, sample->fs), &name);
    if (w > worst_all) {
      worst_all = w;
      worst_name = name;
    }
  }
  CHECK(accepted == 100);
  INFO("worst identity: " << worst_name);
  CHECK(worst_all < 1e-9);
}
