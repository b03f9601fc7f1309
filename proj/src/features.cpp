#include "rramcim/features.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace rramcim::features {

std::string ExtractionConfig::hash() const {
  std::string text = "params";
  for (double v : {params.alpha, params.beta, params.gamma, params.delta, params.lambda, params.eta})
    text += ":" + format_double(v);
  text += "|read:" + format_double(read_voltage);
  text += "|var:" + format_double(variability.sigma_dw) + ":" + format_double(variability.sigma_read);
  if (variability.enabled()) text += "|seed:" + std::to_string(seed);
  for (const auto& e : encoding)
    text += "|enc:" + format_double(e.v_pth) + ":" + format_double(e.v_nth) + ":" +
            format_double(e.pulse_amplitude) + ":" + format_double(e.slot_width);
  return hex64(fnv1a(text));
}

crossbar::CrossbarArray extract_array(const waveform::MultiChannel& samples,
                                      const ExtractionConfig& config, const std::string& window_id) {
  const auto encoded = waveform::encode_window(samples, config.encoding);
  std::vector<waveform::PulseTrain> positive, negative;
  for (const auto& e : encoded) {
    positive.push_back(e.positive);
    negative.push_back(e.negative);
  }
  crossbar::CrossbarArray array(samples.size(), samples.size(), config.params);
  array.reset(0.0);

  crossbar::ExtractOptions options;
  options.variability = config.variability;
  Rng rng = substream(config.seed, "extract/" + window_id);
  if (config.variability.enabled()) options.rng = &rng;
  return crossbar::extract(std::move(array), positive, negative, options);
}

CorrelationMap extract_features(const waveform::MultiChannel& samples, const ExtractionConfig& config,
                                const std::string& window_id) {
  const auto array = extract_array(samples, config, window_id);
  Rng rng = substream(config.seed, "read/" + window_id);
  auto map = crossbar::read_map(array, config.read_voltage, config.variability,
                                config.variability.enabled() ? &rng : nullptr);
  map.window_id = window_id;
  map.config_hash = config.hash();
  return map;
}

CorrelationMap extract_features(const eeg::LabeledWindow& window, const ExtractionConfig& config) {
  return extract_features(window.samples, config, window.id());
}

std::vector<CorrelationMap> extract_all(std::span<const eeg::LabeledWindow> windows,
                                        const ExtractionConfig& config, unsigned threads) {
  std::vector<CorrelationMap> out(windows.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, windows.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < windows.size(); i = next++) out[i] = extract_features(windows[i], config);
  };
  if (threads == 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  pool.clear();
  return out;
}

CoincidenceCounts coincidence_counts(const waveform::EncodedChannel& row,
                                     const waveform::EncodedChannel& col) {
  CoincidenceCounts counts;
  auto pass = [&](const waveform::PulseTrain& a, const waveform::PulseTrain& b) {
    if (a.size() != b.size()) throw InvalidArgument("coincidence_counts: train length mismatch");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const bool x = a.slots[k] != 0, y = b.slots[k] != 0;
      if (x && y)
        ++counts.coincident;
      else if (x || y)
        ++counts.single;
    }
  };
  pass(row.positive, col.positive);
  pass(row.negative, col.negative);
  return counts;
}

Matrix closed_form_states(std::span<const waveform::EncodedChannel> encoded,
                          const device::DeviceParams& params) {
  const std::size_t n = encoded.size();
  Matrix w(n, n);
  if (n == 0) return w;
  const double amplitude = encoded[0].positive.amplitude;
  const double width = encoded[0].positive.slot_width;
  for (const auto& e : encoded)
    if (e.positive.amplitude != amplitude || e.negative.amplitude != amplitude)
      throw InvalidArgument("closed_form_states: channels use different pulse amplitudes");
  const double both = device::drift(params, {2.0 * amplitude, width});
  const double one = device::drift(params, {amplitude, width});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = coincidence_counts(encoded[i], encoded[j]);
      w(i, j) = std::clamp(static_cast<double>(c.coincident) * both + static_cast<double>(c.single) * one, 0.0, 1.0);
    }
  return w;
}

CorrelationMap closed_form_map(std::span<const waveform::EncodedChannel> encoded,
                               const device::DeviceParams& params, double read_voltage) {
  const Matrix w = closed_form_states(encoded, params);
  CorrelationMap map;
  map.values = Matrix(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      map.values(i, j) = device::conductance({w(i, j)}, params, read_voltage);
  return map;
}

double pcc(std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size() || x1.size() < 2) throw InvalidArgument("PCC needs two equal-length series of at least 2 samples");
  const double n = static_cast<double>(x1.size());
  const double m1 = std::accumulate(x1.begin(), x1.end(), 0.0) / n;
  const double m2 = std::accumulate(x2.begin(), x2.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x1.size(); ++k) {
    const double a = x1[k] - m1, b = x2[k] - m2;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidArgument("undefined PCC");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x), ry = ranks(y);
  return pcc(rx, ry);
}

}  // namespace rramcim::features
