#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rramcim/correlation_map.hpp"
#include "rramcim/crossbar.hpp"
#include "rramcim/device.hpp"
#include "rramcim/eegdata.hpp"
#include "rramcim/waveform.hpp"

namespace rramcim::features {

struct ExtractionConfig {
  std::vector<waveform::EncodingConfig> encoding;  // one per channel, or one shared
  device::DeviceParams params;
  device::Variability variability;
  std::uint64_t seed = 0;  // only consumed when variability is enabled
  double read_voltage = device::kReadVoltage;

  /// Stable digest of every field that changes extracted maps.
  std::string hash() const;
};

/// Encode, drive a fresh (w = 0) array, read the map.
CorrelationMap extract_features(const waveform::MultiChannel& samples, const ExtractionConfig& config,
                                const std::string& window_id = {});
CorrelationMap extract_features(const eeg::LabeledWindow& window, const ExtractionConfig& config);

/// Same as extract_features, also returning the final array for compute.
crossbar::CrossbarArray extract_array(const waveform::MultiChannel& samples,
                                      const ExtractionConfig& config, const std::string& window_id = {});

/// Extracts every window on `threads` workers; output order follows input order.
std::vector<CorrelationMap> extract_all(std::span<const eeg::LabeledWindow> windows,
                                        const ExtractionConfig& config, unsigned threads = 0);

struct CoincidenceCounts {
  std::size_t coincident = 0;  // slots where both channels fire
  std::size_t single = 0;      // slots where exactly one fires
  bool operator==(const CoincidenceCounts&) const = default;
};

/// Slot-by-slot count over the positive and the negative pass for device
/// (row channel, column channel).
CoincidenceCounts coincidence_counts(const waveform::EncodedChannel& row,
                                     const waveform::EncodedChannel& col);

/// w_ij predicted from coincidence counts alone:
///   n_coinc * drift(2A) + n_single * drift(A), clamped to [0, 1].
Matrix closed_form_states(std::span<const waveform::EncodedChannel> encoded,
                          const device::DeviceParams& params);

CorrelationMap closed_form_map(std::span<const waveform::EncodedChannel> encoded,
                               const device::DeviceParams& params,
                               double read_voltage = device::kReadVoltage);

/// Pearson correlation coefficient. Throws InvalidArgument("undefined PCC")
/// when either input has zero variance.
double pcc(std::span<const double> x1, std::span<const double> x2);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace rramcim::features
