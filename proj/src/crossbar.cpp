#include "rramcim/crossbar.hpp"

#include <algorithm>
#include <cmath>

namespace rramcim::crossbar {

using device::DeviceState;

CrossbarArray::CrossbarArray(std::size_t rows, std::size_t cols, device::DeviceParams params)
    : rows_(rows), cols_(cols), params_(params), devices_(rows * cols), wl_enable_(rows, 1) {
  if (rows == 0 || cols == 0) throw InvalidArgument("crossbar must have at least one row and column");
  params_.validate();
}

bool CrossbarArray::all_wl_enabled() const {
  return std::all_of(wl_enable_.begin(), wl_enable_.end(), [](auto b) { return b != 0; });
}

void CrossbarArray::reset(double w) {
  std::fill(devices_.begin(), devices_.end(), DeviceState{std::clamp(w, 0.0, 1.0)});
}

namespace {

void run_pass(CrossbarArray& array, std::span<const waveform::PulseTrain> trains,
              const ExtractOptions& options) {
  const std::size_t slots = trains[0].size();
  const double width = trains[0].slot_width;
  const bool noisy = options.variability.sigma_dw > 0.0;
  for (std::size_t k = 0; k < slots; ++k) {
    for (std::size_t i = 0; i < array.rows(); ++i) {
      const double bl = trains[i].slots[k] ? trains[i].amplitude : 0.0;
      for (std::size_t j = 0; j < array.cols(); ++j) {
        const double sl = trains[j].slots[k] ? -trains[j].amplitude : 0.0;
        const double v = bl - sl;
        // Zero bias leaves w untouched exactly; skip the call.
        if (v == 0.0) continue;
        auto& state = array.at(i, j);
        state = noisy ? device::step(state, array.params(), {v, width}, options.variability, *options.rng)
                      : device::step(state, array.params(), {v, width});
      }
    }
    if (options.probe_trace)
      options.probe_trace->push_back(array.at(options.probe_row, options.probe_col).w);
  }
}

void check_trains(const CrossbarArray& array, std::span<const waveform::PulseTrain> trains,
                  std::size_t slots, double width) {
  const std::size_t needed = std::max(array.rows(), array.cols());
  if (trains.size() != needed) throw InvalidArgument("extract: need one pulse train per channel");
  for (const auto& t : trains) {
    if (t.size() != slots) throw InvalidArgument("extract: pulse trains differ in length");
    if (t.slot_width != width) throw InvalidArgument("extract: pulse trains differ in slot width");
  }
}

}  // namespace

CrossbarArray extract(CrossbarArray array, std::span<const waveform::PulseTrain> positive,
                      std::span<const waveform::PulseTrain> negative,
                      const ExtractOptions& options) {
  if (array.rows() != array.cols()) throw InvalidArgument("extract: array must be square");
  if (!array.all_wl_enabled()) throw InvalidArgument("extract: all word lines must be enabled");
  if (positive.empty() || negative.empty()) throw InvalidArgument("extract: no pulse trains");
  const std::size_t slots = positive[0].size();
  const double width = positive[0].slot_width;
  check_trains(array, positive, slots, width);
  check_trains(array, negative, slots, width);
  if (options.variability.sigma_dw > 0.0 && options.rng == nullptr)
    throw InvalidArgument("extract: variability requires a random stream");
  if (options.probe_trace &&
      (options.probe_row >= array.rows() || options.probe_col >= array.cols()))
    throw InvalidArgument("extract: probe outside array");

  run_pass(array, positive, options);
  run_pass(array, negative, options);
  return array;
}

CorrelationMap read_map(const CrossbarArray& array, double read_voltage,
                        const device::Variability& variability, Rng* rng) {
  if (variability.sigma_read > 0.0 && rng == nullptr)
    throw InvalidArgument("read_map: variability requires a random stream");
  CorrelationMap map;
  map.values = Matrix(array.rows(), array.cols());
  std::normal_distribution<double> noise(0.0, variability.sigma_read);
  for (std::size_t i = 0; i < array.rows(); ++i)
    for (std::size_t j = 0; j < array.cols(); ++j) {
      double g = device::conductance(array.at(i, j), array.params(), read_voltage);
      if (variability.sigma_read > 0.0) g *= 1.0 + noise(*rng);
      map.values(i, j) = g;
    }
  return map;
}

CrossbarArray array_from_map(const CorrelationMap& map, const device::DeviceParams& params,
                             double read_voltage) {
  CrossbarArray array(map.values.rows(), map.values.cols(), params);
  for (std::size_t i = 0; i < array.rows(); ++i)
    for (std::size_t j = 0; j < array.cols(); ++j)
      array.at(i, j).w = std::clamp(
          device::state_from_conductance(map.values(i, j), params, read_voltage), 0.0, 1.0);
  return array;
}

void AdcConfig::validate() const {
  if (bits < 1 || bits > 24) throw InvalidArgument("ADC bits must be in [1, 24]");
  if (!(full_scale > 0.0)) throw InvalidArgument("ADC full scale must be positive");
  for (double fs : column_full_scale)
    if (!(fs > 0.0)) throw InvalidArgument("ADC full scale must be positive");
}

AdcSample digitize(double current, const AdcConfig& adc) {
  if (current <= 0.0) return {0, false};
  const double ideal = std::round(current / adc.lsb());
  if (ideal > static_cast<double>(adc.max_code())) return {adc.max_code(), true};
  return {static_cast<std::uint32_t>(ideal), false};
}

AdcSample digitize(double current, const AdcConfig& adc, std::size_t column) {
  if (current <= 0.0) return {0, false};
  const double ideal = std::round(current / adc.lsb(column));
  if (ideal > static_cast<double>(adc.max_code())) return {adc.max_code(), true};
  return {static_cast<std::uint32_t>(ideal), false};
}

double worst_case_full_scale(std::size_t rows, const device::DeviceParams& params, double v_read) {
  return static_cast<double>(rows) * device::current({1.0}, params, v_read);
}

double programmed_full_scale(const CrossbarArray& array, double v_read) {
  double best = 0.0;
  for (std::size_t j = 0; j < array.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < array.rows(); ++i)
      if (array.wl_enabled(i)) sum += device::current(array.at(i, j), array.params(), v_read);
    best = std::max(best, sum);
  }
  return best;
}

std::uint32_t quantize_unit(double value, int bit_width) {
  if (bit_width < 1 || bit_width > 24) throw InvalidArgument("bit width must be in [1, 24]");
  if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("operand outside [0, 1]");
  const double levels = static_cast<double>((1u << bit_width) - 1u);
  return static_cast<std::uint32_t>(std::lround(value * levels));
}

BitSerialWeights quantize_weights(const Matrix& weights, int bit_width) {
  BitSerialWeights out;
  out.rows = weights.rows();
  out.cols = weights.cols();
  out.bit_width = bit_width;
  out.codes.reserve(weights.size());
  for (double w : weights.data()) out.codes.push_back(quantize_unit(w, bit_width));
  return out;
}

namespace {

// Digitizes one column's bit-plane currents and shift-adds them.
std::uint64_t bit_serial_column(const CrossbarArray& array, std::size_t column,
                                const std::vector<std::uint32_t>& row_codes, int bit_width,
                                const AdcConfig& adc, const ComputeOptions& options,
                                std::size_t& clipped) {
  std::normal_distribution<double> noise(0.0, options.variability.sigma_read);
  std::uint64_t acc = 0;
  for (int b = 0; b < bit_width; ++b) {
    double current = 0.0;
    for (std::size_t i = 0; i < array.rows(); ++i) {
      if (!array.wl_enabled(i) || ((row_codes[i] >> b) & 1u) == 0) continue;
      double cell = device::current(array.at(i, column), array.params(), options.v_read);
      if (options.variability.sigma_read > 0.0) cell *= 1.0 + noise(*options.rng);
      current += cell;
    }
    const auto sample = digitize(current, adc, column);
    if (sample.clipped) ++clipped;
    if (options.trace) options.trace->push_back({column, b, current, sample.code, sample.clipped});
    acc += static_cast<std::uint64_t>(sample.code) << b;
  }
  return acc;
}

void check_compute(const AdcConfig& adc, const ComputeOptions& options, std::size_t columns) {
  adc.validate();
  if (!adc.column_full_scale.empty() && adc.column_full_scale.size() != columns)
    throw InvalidArgument("compute: need one ADC reference per column");
  if (options.variability.sigma_read > 0.0 && options.rng == nullptr)
    throw InvalidArgument("compute: variability requires a random stream");
}

}  // namespace

LayerOutput first_layer_compute(const CrossbarArray& array, const BitSerialWeights& weights,
                                const AdcConfig& adc, const ComputeOptions& options) {
  check_compute(adc, options, array.cols());
  if (weights.rows != array.rows() || weights.cols != array.cols())
    throw InvalidArgument("first layer: weight shape does not match array");
  const double denom = static_cast<double>(weights.max_code());
  LayerOutput out;
  std::vector<std::uint32_t> column_codes(array.rows());
  for (std::size_t j = 0; j < array.cols(); ++j) {
    for (std::size_t i = 0; i < array.rows(); ++i) column_codes[i] = weights.code(i, j);
    const auto acc = bit_serial_column(array, j, column_codes, weights.bit_width, adc, options, out.clipped);
    out.accum.push_back(acc);
    out.values.push_back(static_cast<double>(acc) * adc.lsb(j) / denom);
  }
  return out;
}

LayerOutput second_layer_compute(const CrossbarArray& array, std::span<const std::uint32_t> inputs,
                                 int bit_width, const AdcConfig& adc,
                                 const ComputeOptions& options) {
  check_compute(adc, options, array.cols());
  if (inputs.size() != array.rows()) throw InvalidArgument("second layer: input length does not match rows");
  if (bit_width < 1 || bit_width > 24) throw InvalidArgument("bit width must be in [1, 24]");
  const std::vector<std::uint32_t> codes(inputs.begin(), inputs.end());
  const std::uint32_t max_code = (1u << bit_width) - 1u;
  for (auto c : codes)
    if (c > max_code) throw InvalidArgument("second layer: input code exceeds bit width");
  const double denom = static_cast<double>(max_code);
  LayerOutput out;
  for (std::size_t c = 0; c < array.cols(); ++c) {
    const auto acc = bit_serial_column(array, c, codes, bit_width, adc, options, out.clipped);
    out.accum.push_back(acc);
    out.values.push_back(static_cast<double>(acc) * adc.lsb(c) / denom);
  }
  return out;
}

std::vector<double> relu(std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(relu(x));
  return out;
}

}  // namespace rramcim::crossbar
