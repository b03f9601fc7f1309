#pragma once

#include <string>

#include "rramcim/common.hpp"

namespace rramcim {

/// Conductances (siemens) read from an extraction array after one window.
/// Entry (i, j) is the device between row channel i and column channel j.
struct CorrelationMap {
  Matrix values;
  std::string window_id;
  std::string config_hash;

  std::size_t channels() const { return values.rows(); }
  double max_asymmetry() const;
};

/// Whitespace-separated square matrix, one row per line, preceded by
/// "# window=<id> config=<hash>" when provenance is set.
std::string to_matrix_text(const CorrelationMap& map);
CorrelationMap from_matrix_text(const std::string& text);

/// "i,j,siemens" records with a header line; indices are 0-based.
std::string to_records(const CorrelationMap& map);

}  // namespace rramcim
