#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "rramcim/eegdata.hpp"

namespace rramcim::eeg {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 normalized to 1
};

// Butterworth order 4 as two second-order sections, bilinear transform with
// the cutoff prewarped so the -3 dB point lands exactly on cutoff_hz.
std::array<Biquad, 2> butterworth4(double sampling_rate, double cutoff_hz) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / sampling_rate);
  std::array<Biquad, 2> sections{};
  for (int p = 0; p < 2; ++p) {
    const double theta = std::numbers::pi * (2.0 * p + 5.0) / 8.0;  // upper-half-plane poles
    const double q = -2.0 * std::cos(theta);
    const double a0 = 1.0 + q * k + k * k;
    const double gain = k * k / a0;
    sections[static_cast<std::size_t>(p)] = {gain, 2.0 * gain, gain, (2.0 * k * k - 2.0) / a0,
                                             (1.0 - q * k + k * k) / a0};
  }
  return sections;
}

// Transposed direct form II, started in the steady state for a constant
// input equal to x[0] (every section has unit DC gain).
void filter_in_place(std::vector<double>& x, const std::array<Biquad, 2>& sections) {
  if (x.empty()) return;
  for (const auto& s : sections) {
    const double x0 = x[0];
    double z2 = (s.b2 - s.a2) * x0;
    double z1 = (s.b1 - s.a1) * x0 + z2;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

std::vector<double> lowpass_zero_phase(std::span<const double> x, double sampling_rate,
                                       double cutoff_hz) {
  if (!(cutoff_hz > 0.0) || !(sampling_rate > 2.0 * cutoff_hz))
    throw InvalidArgument("low-pass needs 0 < cutoff < sampling_rate / 2");
  if (x.size() < 2) return {x.begin(), x.end()};
  const auto sections = butterworth4(sampling_rate, cutoff_hz);

  // Odd extension at both ends, as scipy's filtfilt does.
  const std::size_t pad = std::min<std::size_t>(15, x.size() - 1);
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  const std::size_t n = x.size();
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  filter_in_place(ext, sections);
  std::reverse(ext.begin(), ext.end());
  filter_in_place(ext, sections);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Recording filter_lowpass(const Recording& recording, double cutoff_hz) {
  Recording out = recording;
  for (auto& channel : out.samples) channel = lowpass_zero_phase(channel, recording.sampling_rate, cutoff_hz);
  return out;
}

}  // namespace rramcim::eeg
