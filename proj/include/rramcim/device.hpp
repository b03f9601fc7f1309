#pragma once

// Behavioral WOx memristor: current readout I(w, V) and state drift dw/dt.
//
//   I     = (1 - w) * alpha * (1 - exp(-beta * V)) + w * gamma * sinh(delta * V)
//   dw/dt = lambda * sinh(eta * V),   0 <= w <= 1
//
// The drift does not depend on w, so a constant-voltage interval integrates
// exactly in closed form and the only nonlinearity left is the clamp.

#include <optional>
#include <span>
#include <vector>

#include "rramcim/common.hpp"

namespace rramcim::device {

struct DeviceParams {
  double alpha = 9e-7;    // A
  double beta = 4.0;      // 1/V
  double gamma = 2.8e-7;  // A
  double delta = 6.0;     // 1/V
  double lambda = 0.045;  // 1/s
  double eta = 6.0;       // 1/V

  /// Throws InvalidArgument unless every parameter is strictly positive.
  void validate() const;
  bool operator==(const DeviceParams&) const = default;
};

struct DeviceState {
  double w = 0.0;
  bool operator==(const DeviceState&) const = default;
};

struct VoltageInterval {
  double voltage = 0.0;   // V, signed
  double duration = 0.0;  // s, > 0
};

/// Multiplicative Gaussian variability. Both sigmas default to zero (ideal device).
struct Variability {
  double sigma_dw = 0.0;
  double sigma_read = 0.0;
  bool enabled() const { return sigma_dw > 0.0 || sigma_read > 0.0; }
};

inline constexpr double kReadVoltage = 0.5;

double current(DeviceState state, const DeviceParams& params, double voltage);

/// State drift over one interval, before clamping.
double drift(const DeviceParams& params, const VoltageInterval& interval);

DeviceState step(DeviceState state, const DeviceParams& params, const VoltageInterval& interval);

/// step() with the drift scaled by (1 + sigma_dw * N(0,1)).
DeviceState step(DeviceState state, const DeviceParams& params, const VoltageInterval& interval,
                 const Variability& var, Rng& rng);

DeviceState apply_waveform(DeviceState state, const DeviceParams& params,
                           std::span<const VoltageInterval> intervals);

/// Same fold as apply_waveform, but records w after every interval.
std::vector<DeviceState> apply_waveform_trace(DeviceState state, const DeviceParams& params,
                                              std::span<const VoltageInterval> intervals);

/// G = I(w, V_read) / V_read. Ideal reads never move w.
double conductance(DeviceState state, const DeviceParams& params,
                   double read_voltage = kReadVoltage);

/// Inverse of conductance(): the w that reads as `siemens`. Not clamped.
double state_from_conductance(double siemens, const DeviceParams& params,
                              double read_voltage = kReadVoltage);

/// A read that also applies the read voltage as a programming interval.
struct DisturbingRead {
  double siemens;
  DeviceState after;
};
DisturbingRead disturbing_read(DeviceState state, const DeviceParams& params, double read_voltage,
                               double read_duration);

struct IvPoint {
  double voltage;
  double current;
  double w;
};

/// Quasi-static staircase sweep v_min -> v_max. At each step the device is
/// held for `dwell` seconds, then current is recorded at the step voltage.
std::vector<IvPoint> iv_sweep(const DeviceParams& params, double v_min, double v_max, int steps,
                              double dwell, DeviceState initial = {});

/// Piecewise-constant device voltage produced by a +amplitude pulse on the
/// pre terminal starting at 0 and a -amplitude pulse on the post terminal
/// starting at dt_offset, both `pulse_width` wide. Device voltage = Vpre - Vpost.
std::vector<VoltageInterval> overlap_waveform(double pulse_width, double amplitude,
                                              double dt_offset);

struct OverlapResult {
  double delta_w;
  double delta_g;  // S, measured at kReadVoltage
};

/// Response of a fresh (w = 0) device to the overlap protocol.
OverlapResult overlap_response(const DeviceParams& params, double pulse_width, double amplitude,
                               double dt_offset);

}  // namespace rramcim::device
