#include "g2flow/examples.hpp"

#include <cmath>

#include "g2flow/g2.hpp"

namespace g2flow {

Form bryant_phi(const Coefficient& f) {
  return Form::parse(7, "e145 + e167 + e246 - e257 - e347 - e356") + Form::monomial(7, {0, 1, 2}, f * f * f);
}

double bryant_f(double t) { return std::pow(10.0 * t / 3.0 + 1.0, 0.2); }

Form as_phi(const Coefficient& A, const Coefficient& B, const Coefficient& C) {
  const Form w1 = Form::parse(7, "e12 + e34");
  const Form w2 = Form::parse(7, "e13 - e24");
  const Form w3 = Form::parse(7, "e14 + e23");
  const Form du = Form::parse(7, "e7");
  return -1.0 * A * wedge(w1, du) + C * wedge(Form::parse(7, "e56"), du) -
         B * (wedge(w3, Form::parse(7, "e5")) - wedge(w2, Form::parse(7, "e6")));
}

ASProfile as_soliton_profile(double k, const GridPtr& grid, int order) {
  const Coefficient u = Coefficient::coordinate(grid, order);
  // F = e^{ku}, g² = F' = k e^{ku}, f² = F/g.
  const Coefficient g = std::sqrt(k) * exp(0.5 * k * u);
  const Coefficient f = std::pow(k, -0.25) * exp(0.25 * k * u);
  return {f, g, 1.0};
}

double as_soliton_lambda(double k) { return -4.5 * k * k; }
double as_soliton_speed(double k) { return 7.5 * k; }

ASProfile as_torsion_free_profile(const GridPtr& grid, int order) {
  const Coefficient u3 = 3.0 * Coefficient::coordinate(grid, order);
  return {pow(u3, 1.0 / 3.0), pow(u3, -1.0 / 3.0), 1.0};
}

Form flat_phi() { return standard_phi(); }

}  // namespace g2flow
