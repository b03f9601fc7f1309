#include "rramcim/device.hpp"

#include <algorithm>
#include <cmath>

namespace rramcim::device {

void DeviceParams::validate() const {
  if (!(alpha > 0 && beta > 0 && gamma > 0 && delta > 0 && lambda > 0 && eta > 0))
    throw InvalidArgument("device parameters must all be strictly positive");
}

double current(DeviceState state, const DeviceParams& p, double voltage) {
  const double w = state.w;
  return (1.0 - w) * p.alpha * (1.0 - std::exp(-p.beta * voltage)) +
         w * p.gamma * std::sinh(p.delta * voltage);
}

double drift(const DeviceParams& p, const VoltageInterval& interval) {
  return p.lambda * std::sinh(p.eta * interval.voltage) * interval.duration;
}

namespace {

void check_interval(const VoltageInterval& interval) {
  if (!(interval.duration > 0.0)) throw InvalidArgument("interval duration must be positive");
}

}  // namespace

DeviceState step(DeviceState state, const DeviceParams& params, const VoltageInterval& interval) {
  check_interval(interval);
  return {std::clamp(state.w + drift(params, interval), 0.0, 1.0)};
}

DeviceState step(DeviceState state, const DeviceParams& params, const VoltageInterval& interval,
                 const Variability& var, Rng& rng) {
  check_interval(interval);
  double dw = drift(params, interval);
  if (var.sigma_dw > 0.0 && dw != 0.0) {
    std::normal_distribution<double> noise(0.0, var.sigma_dw);
    dw *= 1.0 + noise(rng);
  }
  return {std::clamp(state.w + dw, 0.0, 1.0)};
}

DeviceState apply_waveform(DeviceState state, const DeviceParams& params,
                           std::span<const VoltageInterval> intervals) {
  if (intervals.empty()) throw InvalidArgument("waveform has no intervals");
  for (const auto& interval : intervals) state = step(state, params, interval);
  return state;
}

std::vector<DeviceState> apply_waveform_trace(DeviceState state, const DeviceParams& params,
                                              std::span<const VoltageInterval> intervals) {
  if (intervals.empty()) throw InvalidArgument("waveform has no intervals");
  std::vector<DeviceState> trace;
  trace.reserve(intervals.size());
  for (const auto& interval : intervals) {
    state = step(state, params, interval);
    trace.push_back(state);
  }
  return trace;
}

double conductance(DeviceState state, const DeviceParams& params, double read_voltage) {
  return current(state, params, read_voltage) / read_voltage;
}

double state_from_conductance(double siemens, const DeviceParams& params, double read_voltage) {
  // I is affine in w: I = i0 + w * (i1 - i0).
  const double i0 = current({0.0}, params, read_voltage);
  const double i1 = current({1.0}, params, read_voltage);
  return (siemens * read_voltage - i0) / (i1 - i0);
}

DisturbingRead disturbing_read(DeviceState state, const DeviceParams& params, double read_voltage,
                               double read_duration) {
  const double g = conductance(state, params, read_voltage);
  return {g, step(state, params, {read_voltage, read_duration})};
}

std::vector<IvPoint> iv_sweep(const DeviceParams& params, double v_min, double v_max, int steps,
                              double dwell, DeviceState initial) {
  if (!(v_min < v_max)) throw InvalidArgument("iv_sweep needs v_min < v_max");
  if (steps < 2) throw InvalidArgument("iv_sweep needs at least 2 steps");
  if (dwell < 0.0) throw InvalidArgument("iv_sweep dwell must be non-negative");
  std::vector<IvPoint> out;
  out.reserve(static_cast<std::size_t>(steps));
  DeviceState state = initial;
  for (int k = 0; k < steps; ++k) {
    const double v = v_min + (v_max - v_min) * k / (steps - 1);
    if (dwell > 0.0) state = step(state, params, {v, dwell});
    out.push_back({v, current(state, params, v), state.w});
  }
  return out;
}

std::vector<VoltageInterval> overlap_waveform(double pulse_width, double amplitude,
                                              double dt_offset) {
  if (!(pulse_width > 0.0)) throw InvalidArgument("pulse width must be positive");
  std::vector<double> edges{0.0, pulse_width, dt_offset, dt_offset + pulse_width};
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto pre = [&](double t) { return (t >= 0.0 && t < pulse_width) ? amplitude : 0.0; };
  auto post = [&](double t) {
    return (t >= dt_offset && t < dt_offset + pulse_width) ? -amplitude : 0.0;
  };

  std::vector<VoltageInterval> out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double duration = edges[k + 1] - edges[k];
    if (duration <= 0.0) continue;
    const double mid = 0.5 * (edges[k] + edges[k + 1]);
    out.push_back({pre(mid) - post(mid), duration});
  }
  return out;
}

OverlapResult overlap_response(const DeviceParams& params, double pulse_width, double amplitude,
                               double dt_offset) {
  const auto waveform = overlap_waveform(pulse_width, amplitude, dt_offset);
  const DeviceState start{0.0};
  const DeviceState end = apply_waveform(start, params, waveform);
  return {end.w - start.w, conductance(end, params) - conductance(start, params)};
}

}  // namespace rramcim::device
