#pragma once

#include <json.hpp>

#include "speclab/linalg.hpp"

namespace speclab {

// row-major, entries as [re, im]
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// 17 significant digits, reproducible
std::string format_double(double x);

}  // namespace speclab
