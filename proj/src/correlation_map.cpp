#include "rramcim/correlation_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rramcim {

double CorrelationMap::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.rows(); ++i)
    for (std::size_t j = i + 1; j < values.cols(); ++j)
      worst = std::max(worst, std::abs(values(i, j) - values(j, i)));
  return worst;
}

std::string to_matrix_text(const CorrelationMap& map) {
  std::string out;
  if (!map.window_id.empty() || !map.config_hash.empty())
    out += "# window=" + map.window_id + " config=" + map.config_hash + "\n";
  for (std::size_t i = 0; i < map.values.rows(); ++i) {
    for (std::size_t j = 0; j < map.values.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(map.values(i, j));
    }
    out += '\n';
  }
  return out;
}

CorrelationMap from_matrix_text(const std::string& text) {
  CorrelationMap map;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::istringstream header(t.substr(1));
      std::string field;
      while (header >> field) {
        if (field.rfind("window=", 0) == 0) map.window_id = field.substr(7);
        if (field.rfind("config=", 0) == 0) map.config_hash = field.substr(7);
      }
      continue;
    }
    std::istringstream row(t);
    std::vector<double> values;
    std::string token;
    while (row >> token) values.push_back(parse_double(token, "map line " + std::to_string(line_no)));
    rows.push_back(std::move(values));
  }
  const std::size_t n = rows.size();
  map.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw DataError("correlation map is not square");
    for (std::size_t j = 0; j < n; ++j) map.values(i, j) = rows[i][j];
  }
  return map;
}

std::string to_records(const CorrelationMap& map) {
  std::string out = "i,j,siemens\n";
  for (std::size_t i = 0; i < map.values.rows(); ++i)
    for (std::size_t j = 0; j < map.values.cols(); ++j)
      out += std::to_string(i) + "," + std::to_string(j) + "," + format_double(map.values(i, j)) + "\n";
  return out;
}

}  // namespace rramcim
