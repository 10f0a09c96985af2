#pragma once

#include "json.hpp"

#include "g2flow/form.hpp"
#include "g2flow/matrix.hpp"

namespace g2flow {

/// Constant coefficients become numbers; fields become {"grid":{...},"samples":[...],"derivatives":[[...],...]}.
nlohmann::json coefficient_to_json(const Coefficient& c);
Coefficient coefficient_from_json(const nlohmann::json& j);

/// {"n":7,"degree":3,"terms":[{"idx":[1,2,3],"coeff":1.0}, ...]} with 1-based indices; zero terms are omitted.
nlohmann::json form_to_json(const Form& f);
Form form_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace g2flow
