#pragma once

// 1T1R crossbar simulation.
//
// Extraction mode: every word line on, row i's bit line carries channel i's
// pulses at +amplitude, column j's source line carries channel j's pulses at
// -amplitude, so device (i, j) sees 2*amplitude exactly when both channels
// fire in a slot.
//
// Compute mode (DAC-less): an operand vector is applied one bit-plane at a
// time, rows whose bit is set driven at v_read and the rest at 0 V. The MUX
// routes one source line to the ADC per read; shift-and-add over the planes
// rebuilds the weighted column sum.

#include <cstdint>
#include <span>
#include <vector>

#include "rramcim/common.hpp"
#include "rramcim/correlation_map.hpp"
#include "rramcim/device.hpp"
#include "rramcim/waveform.hpp"

namespace rramcim::crossbar {

inline constexpr double kComputeVoltage = 1.0;

class CrossbarArray {
public:
  CrossbarArray(std::size_t rows, std::size_t cols, device::DeviceParams params = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const device::DeviceParams& params() const { return params_; }

  device::DeviceState& at(std::size_t r, std::size_t c) { return devices_[r * cols_ + c]; }
  device::DeviceState at(std::size_t r, std::size_t c) const { return devices_[r * cols_ + c]; }

  bool wl_enabled(std::size_t r) const { return wl_enable_[r] != 0; }
  void set_wl(std::size_t r, bool on) { wl_enable_[r] = on ? 1 : 0; }
  bool all_wl_enabled() const;

  /// Pre-set every device to state w (extraction starts from w = 0).
  void reset(double w = 0.0);

  bool operator==(const CrossbarArray&) const = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  device::DeviceParams params_;
  std::vector<device::DeviceState> devices_;
  std::vector<std::uint8_t> wl_enable_;
};

struct ExtractOptions {
  device::Variability variability;
  Rng* rng = nullptr;  // required when variability is enabled
  // Optional probe: w of device (probe_row, probe_col) after every slot of both passes.
  std::vector<double>* probe_trace = nullptr;
  std::size_t probe_row = 0;
  std::size_t probe_col = 0;
};

/// Runs the positive pass then the negative pass. Row i takes channel i's
/// train on its bit line, column j takes channel j's train on its source line.
CrossbarArray extract(CrossbarArray array, std::span<const waveform::PulseTrain> positive,
                      std::span<const waveform::PulseTrain> negative,
                      const ExtractOptions& options = {});

/// Conductance map at the read voltage. Non-destructive.
CorrelationMap read_map(const CrossbarArray& array, double read_voltage = device::kReadVoltage,
                        const device::Variability& variability = {}, Rng* rng = nullptr);

/// Rebuilds an extraction array whose read_map() reproduces `map`.
CrossbarArray array_from_map(const CorrelationMap& map, const device::DeviceParams& params,
                             double read_voltage = device::kReadVoltage);

struct AdcConfig {
  int bits = 8;
  double full_scale = 0.0;  // A, current mapped to the top code
  double sampling = 1e9;    // samples/s, metadata only
  // Optional reference per MUX-selected column; empty means full_scale everywhere.
  std::vector<double> column_full_scale;

  void validate() const;
  std::uint32_t max_code() const { return (1u << bits) - 1u; }
  double lsb() const { return full_scale / static_cast<double>(max_code()); }
  double scale_for(std::size_t column) const {
    return column_full_scale.empty() ? full_scale : column_full_scale[column];
  }
  double lsb(std::size_t column) const { return scale_for(column) / static_cast<double>(max_code()); }
};

struct AdcSample {
  std::uint32_t code;
  bool clipped;
};

/// Uniform round-to-nearest quantizer; currents above full scale saturate.
AdcSample digitize(double current, const AdcConfig& adc);
/// Same, against the reference of `column`.
AdcSample digitize(double current, const AdcConfig& adc, std::size_t column);

/// rows * I(w = 1, v_read): the largest column current any programmed state can draw.
double worst_case_full_scale(std::size_t rows, const device::DeviceParams& params,
                             double v_read = kComputeVoltage);

/// Largest all-rows-on column current of this array as currently programmed.
double programmed_full_scale(const CrossbarArray& array, double v_read = kComputeVoltage);

/// Unsigned fixed-point operands: value = code / (2^bit_width - 1), applied
/// at scale volts per unit (the compute read voltage).
struct BitSerialWeights {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> codes;
  int bit_width = 8;
  double scale = kComputeVoltage;

  std::uint32_t code(std::size_t r, std::size_t c) const { return codes[r * cols + c]; }
  std::uint32_t max_code() const { return (1u << bit_width) - 1u; }
  double value(std::size_t r, std::size_t c) const {
    return static_cast<double>(code(r, c)) / static_cast<double>(max_code());
  }
};

/// Rounds each entry of a [0, 1] matrix to the nearest of 2^bit_width levels.
BitSerialWeights quantize_weights(const Matrix& weights, int bit_width = 8);
std::uint32_t quantize_unit(double value, int bit_width);

struct PlaneRecord {
  std::size_t column;
  int bit;
  double current;
  std::uint32_t code;
  bool clipped;
};

struct ComputeOptions {
  double v_read = kComputeVoltage;
  device::Variability variability;  // only sigma_read is used
  Rng* rng = nullptr;
  std::vector<PlaneRecord>* trace = nullptr;
};

struct LayerOutput {
  std::vector<std::uint64_t> accum;  // shift-and-add result, in ADC codes
  std::vector<double> values;        // accum * lsb / (2^bit_width - 1), amperes
  std::size_t clipped = 0;           // bit-plane reads that saturated
};

/// h_j = sum_i W_ij * I(w_ij, v_read): weight column j drives the bit lines
/// while the MUX selects source line j.
LayerOutput first_layer_compute(const CrossbarArray& array, const BitSerialWeights& weights,
                                const AdcConfig& adc, const ComputeOptions& options = {});

/// logit_c = sum_j x_j * I(w_jc, v_read) with the same code vector x on every column.
LayerOutput second_layer_compute(const CrossbarArray& array, std::span<const std::uint32_t> inputs,
                                 int bit_width, const AdcConfig& adc,
                                 const ComputeOptions& options = {});

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
std::vector<double> relu(std::span<const double> xs);

}  // namespace rramcim::crossbar
