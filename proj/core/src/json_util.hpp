#pragma once

#include <json.hpp>

#include "gmmfit/piecewise_poly.hpp"

namespace gmmfit::detail {

nlohmann::ordered_json pp_to_json(const PiecewisePolynomial& p);
PiecewisePolynomial pp_from_json(const nlohmann::json& j);
nlohmann::json parse_json(const std::string& text);

}  // namespace gmmfit::detail
