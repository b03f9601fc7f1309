#pragma once

// Dual-threshold pulse encoding of EEG samples.
//
// Every raw sample maps to one time slot. A sample strictly above v_pth
// sets the slot in the positive train; strictly below v_nth sets it in the
// negative train. Trains are replayed positive pass first, then negative.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rramcim/common.hpp"

namespace rramcim::waveform {

struct EncodingConfig {
  double v_pth = 0.0;             // µV
  double v_nth = 0.0;             // µV
  double pulse_amplitude = 0.8;   // V
  double slot_width = 40e-9;      // s

  void validate() const;
  bool operator==(const EncodingConfig&) const = default;
};

enum class Polarity : std::uint8_t { positive = 0, negative = 1 };

struct PulseTrain {
  std::vector<std::uint8_t> slots;  // 0 or 1
  double amplitude = 0.8;
  double slot_width = 40e-9;
  Polarity polarity = Polarity::positive;

  std::size_t size() const { return slots.size(); }
  std::size_t count() const;
  double duration() const { return slot_width * static_cast<double>(slots.size()); }
  bool operator==(const PulseTrain&) const = default;
};

struct EncodedChannel {
  PulseTrain positive;
  PulseTrain negative;
};

/// Channel-major samples: channels[c][k] is sample k of channel c, in µV.
using MultiChannel = std::vector<std::vector<double>>;

EncodedChannel encode_channel(std::span<const double> samples, const EncodingConfig& cfg);

/// One config per channel, or a single config shared by all channels.
std::vector<EncodedChannel> encode_window(const MultiChannel& samples,
                                          std::span<const EncodingConfig> cfgs);

/// Per-channel thresholds mu +/- k_sigma * sigma pooled over all training windows.
/// `base` supplies amplitude and slot width.
std::vector<EncodingConfig> calibrate_thresholds(std::span<const MultiChannel> windows,
                                                 double k_sigma = 1.0,
                                                 const EncodingConfig& base = {});

/// Total slot count of the positive-then-negative replay of one channel.
std::size_t extraction_slots(std::size_t samples_per_window);
double extraction_latency(std::size_t samples_per_window, double slot_width);

// Binary layout (little-endian):
//   "RPT1"            4 bytes magic
//   polarity          u8 (0 positive, 1 negative)
//   amplitude         f64, volts
//   slot_width        f64, seconds
//   slot_count        u64
//   bits              ceil(slot_count / 8) bytes, slot k at byte k/8, bit k%8
std::vector<std::uint8_t> to_binary(const PulseTrain& train);
PulseTrain from_binary(std::span<const std::uint8_t> bytes);

/// "+ 0.8V 4e-08s |0110..." debug line; '-' prefix for negative trains.
std::string to_text(const PulseTrain& train);

}  // namespace rramcim::waveform
