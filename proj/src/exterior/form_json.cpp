#include "g2flow/form_json.hpp"

#include <memory>

namespace g2flow {

nlohmann::json coefficient_to_json(const Coefficient& c) {
  if (c.is_constant()) return c.value();
  const Grid& g = *c.grid();
  nlohmann::json j;
  j["grid"] = {{"min", g.min}, {"max", g.max}, {"count", g.count}};
  j["samples"] = c.values();
  if (c.order() > 0) {
    nlohmann::json derivs = nlohmann::json::array();
    for (int k = 1; k <= c.order(); ++k) {
      std::vector<double> dk(static_cast<std::size_t>(g.count));
      for (int i = 0; i < g.count; ++i) dk[static_cast<std::size_t>(i)] = c.derivative_value(k, i);
      derivs.push_back(std::move(dk));
    }
    j["derivatives"] = std::move(derivs);
  }
  return j;
}

Coefficient coefficient_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_object() || !j.contains("grid") || !j.contains("samples")) {
    throw ConfigurationError("coefficient must be a number or a {grid, samples} object");
  }
  const auto& jg = j.at("grid");
  auto grid = std::make_shared<const Grid>(
      Grid{jg.at("min").get<double>(), jg.at("max").get<double>(), jg.at("count").get<int>()});
  auto samples = j.at("samples").get<std::vector<double>>();
  if (static_cast<int>(samples.size()) != grid->count) throw DimensionError("sample count does not match grid");
  if (j.contains("derivatives")) {
    auto derivs = j.at("derivatives").get<std::vector<std::vector<double>>>();
    for (const auto& dk : derivs) {
      if (static_cast<int>(dk.size()) != grid->count) throw DimensionError("derivative count does not match grid");
    }
    return Coefficient::with_derivatives(grid, std::move(samples), derivs);
  }
  return Coefficient::sampled(grid, std::move(samples));
}

nlohmann::json form_to_json(const Form& f) {
  nlohmann::json terms = nlohmann::json::array();
  const BasisTable& t = BasisTable::get(f.dim(), f.degree());
  for (int s = 0; s < f.size(); ++s) {
    if (f[s].is_zero()) continue;
    std::vector<int> idx = t.indices(s);
    for (int& i : idx) ++i;
    terms.push_back({{"idx", idx}, {"coeff", coefficient_to_json(f[s])}});
  }
  return {{"n", f.dim()}, {"degree", f.degree()}, {"terms", terms}};
}

Form form_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const int k = j.at("degree").get<int>();
  Form f(n, k);
  for (const auto& term : j.at("terms")) {
    std::vector<int> idx = term.at("idx").get<std::vector<int>>();
    if (static_cast<int>(idx.size()) != k) throw DimensionError("term index count does not match degree");
    for (int& i : idx) --i;
    f += Form::monomial(n, std::span<const int>(idx), coefficient_from_json(term.at("coeff")));
  }
  return f;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(coefficient_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace g2flow
