#include "speclab/json_io.hpp"

#include <cstdio>

namespace speclab {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.dim(); ++j)
      row.push_back(nlohmann::json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  Matrix m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(j[i].size()) != n) throw contract_error("matrix_from_json: not square");
    for (int c = 0; c < n; ++c)
      m(i, c) = cplx(j[i][c][0].get<double>(), j[i][c][1].get<double>());
  }
  return m;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace speclab
