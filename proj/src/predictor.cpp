#include "rramcim/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace rramcim::predictor {

void NetworkWeights::validate() const {
  if (layer1.rows() == 0 || layer1.rows() != layer1.cols())
    throw InvalidArgument("layer 1 must be a non-empty square matrix");
  if (layer2.rows() != layer1.cols() || layer2.cols() != 2)
    throw InvalidArgument("layer 2 must be channels x 2");
  for (const Matrix* m : {&layer1, &layer2})
    for (double w : m->data())
      if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("weights must lie in [0, 1]");
  if (bit_width < 1 || bit_width > 24) throw InvalidArgument("bit width must be in [1, 24]");
}

Matrix feature_matrix(const Matrix& map, const device::DeviceParams& params, double read_voltage,
                      double compute_voltage) {
  const double base = device::current({0.0}, params, compute_voltage);
  Matrix x(map.rows(), map.cols());
  for (std::size_t i = 0; i < map.rows(); ++i)
    for (std::size_t j = 0; j < map.cols(); ++j) {
      const double w = std::clamp(device::state_from_conductance(map(i, j), params, read_voltage), 0.0, 1.0);
      x(i, j) = device::current({w}, params, compute_voltage) / base;
    }
  return x;
}

NetworkWeights initial_weights(std::size_t channels, std::uint64_t seed) {
  Rng rng = substream(seed, "predictor/init");
  std::uniform_real_distribution<double> uni(0.3, 0.7);
  NetworkWeights w;
  w.layer1 = Matrix(channels, channels);
  w.layer2 = Matrix(channels, 2);
  for (double& v : w.layer1.data()) v = uni(rng);
  for (double& v : w.layer2.data()) v = uni(rng);
  w.temperature = 10.0;
  w.seed = seed;
  return w;
}

namespace {

struct OutputMap {
  double offset;  // u(0)
  double slope;   // du/dv
};

OutputMap output_map(const device::DeviceParams& params, double compute_voltage) {
  const double i0 = device::current({0.0}, params, compute_voltage);
  const double i1 = device::current({1.0}, params, compute_voltage);
  return {i0 / i1, (i1 - i0) / i1};
}

struct Adam {
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  void update(std::span<double> params, std::span<const double> grad, double lr, long t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t k = 0; k < params.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * grad[k];
      v[k] = b2 * v[k] + (1.0 - b2) * grad[k] * grad[k];
      params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
  std::vector<double> m, v;
};

void project(std::span<double> values) {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

FloatOutput forward(const NetworkWeights& weights, const Matrix& x, const device::DeviceParams& params,
                    double compute_voltage) {
  const std::size_t n = weights.layer1.rows();
  if (x.rows() != n || x.cols() != n) throw InvalidArgument("feature shape does not match network");
  const auto om = output_map(params, compute_voltage);
  const double norm = weights.temperature / static_cast<double>(n * n);
  FloatOutput out;
  out.hidden.assign(n, 0.0);
  out.logits.assign(2, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) h += weights.layer1(i, j) * x(i, j);
    out.hidden[j] = crossbar::relu(h);
  }
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < n; ++j)
      out.logits[c] += norm * out.hidden[j] * (om.offset + om.slope * weights.layer2(j, c));
  return out;
}

Label decide(double interictal_score, double preictal_score) {
  return preictal_score > interictal_score ? Label::preictal : Label::interictal;
}

Label predict_float(const NetworkWeights& weights, const Matrix& map, const device::DeviceParams& params,
                    const TrainConfig& config) {
  const auto x = feature_matrix(map, params, config.read_voltage, config.compute_voltage);
  const auto out = forward(weights, x, params, config.compute_voltage);
  return decide(out.logits[0], out.logits[1]);
}

NetworkWeights train(std::span<const Example> examples, const device::DeviceParams& params,
                     const TrainConfig& config, std::uint64_t seed) {
  if (examples.empty()) throw InvalidArgument("degenerate training set");
  const std::size_t n = examples[0].map.rows();

  // Canonical order: label, then map values lexicographically.
  std::vector<const Example*> ordered;
  for (const auto& e : examples) {
    if (e.map.rows() != n || e.map.cols() != n) throw InvalidArgument("training maps differ in shape");
    ordered.push_back(&e);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const Example* a, const Example* b) {
    if (a->label != b->label) return a->label < b->label;
    const auto da = a->map.data(), db = b->map.data();
    return std::lexicographical_compare(da.begin(), da.end(), db.begin(), db.end());
  });

  std::vector<Matrix> xs;
  std::array<std::vector<std::size_t>, 2> by_class;
  for (const auto* e : ordered) {
    by_class[static_cast<std::size_t>(e->label)].push_back(xs.size());
    xs.push_back(feature_matrix(e->map, params, config.read_voltage, config.compute_voltage));
  }
  if (by_class[0].empty() || by_class[1].empty()) throw InvalidArgument("degenerate training set");

  NetworkWeights w = initial_weights(n, seed);
  w.bit_width = 8;
  if (config.steps <= 0) return w;

  const auto om = output_map(params, config.compute_voltage);
  const double inv_nn = 1.0 / static_cast<double>(n * n);
  Rng rng = substream(seed, "predictor/batches");
  Adam adam1(w.layer1.size()), adam2(w.layer2.size()), adam_t(1);
  std::vector<double> g1(w.layer1.size()), g2(w.layer2.size());
  std::vector<double> dh(n), gain(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double log_t = std::log(w.temperature);
  NetworkWeights wq = w;
  const std::size_t half = static_cast<std::size_t>(std::max(1, config.batch_size / 2));

  for (long step = 1; step <= config.steps; ++step) {
    std::fill(g1.begin(), g1.end(), 0.0);
    std::fill(g2.begin(), g2.end(), 0.0);
    double gt = 0.0;
    w.temperature = std::exp(log_t);
    if (config.quantization_aware) {
      // Straight-through: the forward pass sees the deployed 8-bit codes, gradients update w.
      wq = w;
      for (double& v : wq.layer1.data())
        v = static_cast<double>(crossbar::quantize_unit(v, w.bit_width)) / static_cast<double>((1u << w.bit_width) - 1u);
    }
    for (std::size_t cls = 0; cls < 2; ++cls) {
      std::uniform_int_distribution<std::size_t> pick(0, by_class[cls].size() - 1);
      for (std::size_t b = 0; b < half; ++b) {
        const Matrix& x = xs[by_class[cls][pick(rng)]];
        const auto out = forward(config.quantization_aware ? wq : w, x, params, config.compute_voltage);
        // Deployment-error surrogate: r_j -> r_j (1 + e_j), z_c -> z_c + s * mean(z) * e_c.
        const double norm = w.temperature * inv_nn;
        for (std::size_t j = 0; j < n; ++j) gain[j] = 1.0 + config.hidden_noise * gauss(rng);
        const double zbar = 0.5 * (out.logits[0] + out.logits[1]);
        double z[2];
        for (std::size_t c = 0; c < 2; ++c) {
          z[c] = config.logit_noise * zbar * gauss(rng);
          for (std::size_t j = 0; j < n; ++j)
            z[c] += norm * out.hidden[j] * gain[j] * (om.offset + om.slope * w.layer2(j, c));
        }
        const double zmax = std::max(z[0], z[1]);
        const double e0 = std::exp(z[0] - zmax), e1 = std::exp(z[1] - zmax);
        const double p1 = e1 / (e0 + e1);
        const double gz[2] = {(1.0 - p1) - (cls == 0 ? 1.0 : 0.0), p1 - (cls == 1 ? 1.0 : 0.0)};
        gt += gz[0] * z[0] + gz[1] * z[1];
        for (std::size_t j = 0; j < n; ++j) {
          double dr = 0.0;
          for (std::size_t c = 0; c < 2; ++c) {
            dr += gz[c] * norm * gain[j] * (om.offset + om.slope * w.layer2(j, c));
            g2[j * 2 + c] += gz[c] * norm * out.hidden[j] * gain[j] * om.slope;
          }
          dh[j] = out.hidden[j] > 0.0 ? dr : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) g1[i * n + j] += dh[j] * x(i, j);
      }
    }
    const double scale = 1.0 / static_cast<double>(2 * half);
    for (double& g : g1) g *= scale;
    for (double& g : g2) g *= scale;
    gt *= scale;
    const double progress = static_cast<double>(step - 1) / static_cast<double>(config.steps);
    const double lr = config.learning_rate * (config.cosine_decay ? 0.5 * (1.0 + std::cos(std::numbers::pi * progress)) : 1.0);
    adam1.update(w.layer1.data(), g1, lr, step);
    adam2.update(w.layer2.data(), g2, lr, step);
    double t_param[1] = {log_t};
    const double t_grad[1] = {gt};
    adam_t.update(t_param, t_grad, lr, step);
    log_t = std::clamp(t_param[0], std::log(1e-2), std::log(config.max_temperature));
    project(w.layer1.data());
    project(w.layer2.data());
  }
  w.temperature = std::exp(log_t);
  return w;
}

namespace {

std::vector<std::uint32_t> hidden_codes(const DeployedModel& model, const crossbar::LayerOutput& layer1) {
  std::vector<std::uint32_t> codes;
  for (double h : layer1.values) {
    const double unit = std::min(1.0, crossbar::relu(h) / model.hidden_full_scale);
    codes.push_back(crossbar::quantize_unit(unit, model.layer1.bit_width));
  }
  return codes;
}

std::vector<std::uint32_t> infer_hidden(const DeployedModel& model, const crossbar::CrossbarArray& array) {
  crossbar::ComputeOptions opts;
  opts.v_read = model.compute_voltage;
  return hidden_codes(model, crossbar::first_layer_compute(array, model.layer1, model.adc1, opts));
}

}  // namespace

DeployedModel deploy(const NetworkWeights& weights, const device::DeviceParams& params,
                     const DeployOptions& options) {
  weights.validate();
  const std::size_t n = weights.layer1.rows();
  DeployedModel model{params,
                      crossbar::quantize_weights(weights.layer1, weights.bit_width),
                      crossbar::CrossbarArray(n, 2, params),
                      {},
                      {},
                      0.0,
                      options.compute_voltage,
                      options.read_voltage,
                      {}};
  model.layer1.scale = options.compute_voltage;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < 2; ++c) model.layer2.at(j, c).w = weights.layer2(j, c);

  auto& st = model.stats;
  for (std::size_t k = 0; k < weights.layer1.size(); ++k) {
    const double err = std::abs(weights.layer1.data()[k] - model.layer1.value(k / n, k % n));
    st.layer1_max_error = std::max(st.layer1_max_error, err);
    st.layer1_mean_error += err / static_cast<double>(weights.layer1.size());
  }
  for (std::size_t k = 0; k < weights.layer2.size(); ++k) {
    const double err = std::abs(weights.layer2.data()[k] - model.layer2.at(k / 2, k % 2).w);
    st.layer2_max_error = std::max(st.layer2_max_error, err);
    st.layer2_mean_error += err / static_cast<double>(weights.layer2.size());
  }

  // Largest bit-plane current each column draws for a given operand code matrix.
  auto plane_peaks = [](const crossbar::CrossbarArray& array, auto code_of, int bits, double v,
                        std::vector<double>& peak) {
    for (std::size_t j = 0; j < array.cols(); ++j)
      for (int b = 0; b < bits; ++b) {
        double current = 0.0;
        for (std::size_t i = 0; i < array.rows(); ++i)
          if ((code_of(i, j) >> b) & 1u) current += device::current(array.at(i, j), array.params(), v);
        peak[j] = std::max(peak[j], current);
      }
  };

  const int bits = weights.bit_width;
  const double vc = options.compute_voltage;
  std::vector<double> peak1(n, 0.0), peak2(2, 0.0);
  std::vector<crossbar::CrossbarArray> arrays;
  double hidden_fs = 0.0;
  for (const auto& map : options.calibration_maps) {
    arrays.push_back(crossbar::array_from_map({map, {}, {}}, params, options.read_voltage));
    plane_peaks(arrays.back(), [&](std::size_t i, std::size_t j) { return model.layer1.code(i, j); }, bits, vc, peak1);
    for (std::size_t j = 0; j < n; ++j) {
      double h = 0.0;
      for (std::size_t i = 0; i < n; ++i) h += model.layer1.value(i, j) * device::current(arrays.back().at(i, j), params, vc);
      hidden_fs = std::max(hidden_fs, h);
    }
  }

  const double worst1 = crossbar::worst_case_full_scale(n, params, vc);
  const double fs2 = crossbar::programmed_full_scale(model.layer2, vc);
  model.adc1 = {options.adc_bits, worst1, 1e9, {}};
  model.adc2 = {options.adc_bits, fs2, 1e9, {}};
  if (options.calibration_maps.empty()) {
    model.hidden_full_scale = worst1;
  } else {
    model.hidden_full_scale = hidden_fs > 0.0 ? hidden_fs * options.headroom : worst1;
    model.adc1.column_full_scale.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      model.adc1.column_full_scale[j] = peak1[j] > 0.0 ? peak1[j] * options.headroom : worst1;
    model.adc1.full_scale = *std::max_element(model.adc1.column_full_scale.begin(), model.adc1.column_full_scale.end());

    for (const auto& array : arrays) {
      const auto hidden = infer_hidden(model, array);
      plane_peaks(model.layer2, [&](std::size_t i, std::size_t) { return hidden[i]; }, bits, vc, peak2);
    }
    model.adc2.column_full_scale.resize(2);
    for (std::size_t c = 0; c < 2; ++c)
      model.adc2.column_full_scale[c] = peak2[c] > 0.0 ? std::min(fs2, peak2[c] * options.headroom) : fs2;
    model.adc2.full_scale = std::max(model.adc2.column_full_scale[0], model.adc2.column_full_scale[1]);
  }
  model.adc1.validate();
  model.adc2.validate();
  return model;
}

Inference infer(const DeployedModel& model, const crossbar::CrossbarArray& extraction_array) {
  crossbar::ComputeOptions opts;
  opts.v_read = model.compute_voltage;
  Inference out;
  out.layer1 = crossbar::first_layer_compute(extraction_array, model.layer1, model.adc1, opts);
  out.hidden_codes = hidden_codes(model, out.layer1);
  out.layer2 = crossbar::second_layer_compute(model.layer2, out.hidden_codes, model.layer1.bit_width,
                                              model.adc2, opts);
  out.label = decide(out.layer2.values[0], out.layer2.values[1]);
  return out;
}

Label predict_window(const DeployedModel& model, const CorrelationMap& map) {
  return infer(model, crossbar::array_from_map(map, model.params, model.read_voltage)).label;
}

// ------------------------------------------------------------ metrics ----

PatientMetrics score(std::string patient_id, std::span<const ScoredWindow> windows,
                     const AlarmConfig& alarm) {
  PatientMetrics m;
  m.patient_id = std::move(patient_id);
  std::map<int, std::pair<double, bool>> seizures;  // index -> (earliest window start, predicted)
  std::map<int, double> onsets;
  std::vector<const ScoredWindow*> interictal;
  for (const auto& w : windows) {
    ++m.windows;
    if (w.predicted == w.truth) ++m.correct_windows;
    if (w.truth == Label::preictal) {
      auto [it, fresh] = seizures.try_emplace(w.seizure_index, w.start, false);
      it->second.first = std::min(it->second.first, w.start);
      it->second.second = it->second.second || w.predicted == Label::preictal;
      onsets[w.seizure_index] = w.seizure_onset;
    } else {
      interictal.push_back(&w);
    }
  }
  m.seizures = static_cast<int>(seizures.size());
  double covered = 0.0;
  for (const auto& [idx, s] : seizures) {
    if (s.second) ++m.predicted_seizures;
    covered += std::min(alarm.horizon, onsets[idx] - s.first) / 60.0;
  }
  if (m.seizures > 0) {
    m.sensitivity = 100.0 * m.predicted_seizures / m.seizures;
    m.predicted_time = covered / m.seizures;
  }

  std::stable_sort(interictal.begin(), interictal.end(), [](auto a, auto b) { return a->start < b->start; });
  bool armed = false;
  double last_alarm = 0.0;
  for (const auto* w : interictal) {
    if (w->predicted != Label::preictal) continue;
    if (armed && w->start - last_alarm < alarm.refractory) continue;
    ++m.false_alarms;
    armed = true;
    last_alarm = w->start;
  }
  m.interictal_hours = static_cast<double>(interictal.size()) * alarm.window_seconds / 3600.0;
  m.fpr_per_hour = m.interictal_hours > 0.0 ? m.false_alarms / m.interictal_hours : 0.0;
  return m;
}

PredictionMetrics summarize(std::vector<PatientMetrics> patients) {
  PredictionMetrics out;
  std::sort(patients.begin(), patients.end(), [](const auto& a, const auto& b) { return a.patient_id < b.patient_id; });
  out.patients = std::move(patients);
  if (out.patients.empty()) return out;
  for (const auto& p : out.patients) {
    out.mean_sensitivity += p.sensitivity;
    out.mean_fpr_per_hour += p.fpr_per_hour;
    out.mean_predicted_time += p.predicted_time;
  }
  const double n = static_cast<double>(out.patients.size());
  out.mean_sensitivity /= n;
  out.mean_fpr_per_hour /= n;
  out.mean_predicted_time /= n;
  return out;
}

std::string metrics_to_text(const PredictionMetrics& metrics, const std::string& config_hash) {
  std::string out = "# config=" + config_hash + "\n";
  out += "patient,seizures,predicted,sensitivity_pct,false_alarms,interictal_h,fpr_per_h,predicted_time_min,windows,window_accuracy\n";
  for (const auto& p : metrics.patients) {
    out += p.patient_id + "," + std::to_string(p.seizures) + "," + std::to_string(p.predicted_seizures) + "," +
           format_double(p.sensitivity) + "," + std::to_string(p.false_alarms) + "," +
           format_double(p.interictal_hours) + "," + format_double(p.fpr_per_hour) + "," +
           format_double(p.predicted_time) + "," + std::to_string(p.windows) + "," +
           format_double(p.window_accuracy()) + "\n";
  }
  out += "average,,," + format_double(metrics.mean_sensitivity) + ",,," + format_double(metrics.mean_fpr_per_hour) +
         "," + format_double(metrics.mean_predicted_time) + ",,\n";
  return out;
}

std::string metrics_report(const PredictionMetrics& metrics) {
  std::string out = "Patient     Predicted Time(min)  Sensitivity(%)  FPR(/h)\n";
  char line[128];
  for (const auto& p : metrics.patients) {
    std::snprintf(line, sizeof line, "%-11s %19.1f %15.1f %8.3f\n", p.patient_id.c_str(), p.predicted_time,
                  p.sensitivity, p.fpr_per_hour);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-11s %19.1f %15.1f %8.3f\n", "Avg.", metrics.mean_predicted_time,
                metrics.mean_sensitivity, metrics.mean_fpr_per_hour);
  out += line;
  return out;
}

// -------------------------------------------------------- serialization ----

namespace {

void append_matrix(std::string& out, const char* name, const Matrix& m) {
  out += std::string(name) + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
}

Matrix read_matrix(std::istream& in, const std::string& name) {
  std::string tag;
  std::size_t rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name) throw DataError("weights: expected '" + name + "' block");
  Matrix m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) {
    std::string token;
    if (!(in >> token)) throw DataError("weights: unexpected end of data in " + name);
    m.data()[k] = parse_double(token, "weights " + name);
  }
  return m;
}

}  // namespace

std::string weights_to_text(const NetworkWeights& w) {
  std::string out = "# rramcim network weights\n";
  out += "# bit_width=" + std::to_string(w.bit_width) + " scale=" + format_double(w.scale) +
         " temperature=" + format_double(w.temperature) + " seed=" + std::to_string(w.seed) +
         " config=" + (w.config_hash.empty() ? "-" : w.config_hash) + "\n";
  append_matrix(out, "layer1", w.layer1);
  append_matrix(out, "layer2", w.layer2);
  return out;
}

NetworkWeights weights_from_text(const std::string& text) {
  NetworkWeights w;
  std::istringstream in(text);
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] != '#') {
      body += t + "\n";
      continue;
    }
    std::istringstream header(t.substr(1));
    std::string field;
    while (header >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "bit_width") w.bit_width = static_cast<int>(parse_int(value, "bit_width"));
      if (key == "scale") w.scale = parse_double(value, "scale");
      if (key == "temperature") w.temperature = parse_double(value, "temperature");
      if (key == "seed") w.seed = static_cast<std::uint64_t>(std::stoull(value));
      if (key == "config") w.config_hash = value == "-" ? "" : value;
    }
  }
  std::istringstream blocks(body);
  w.layer1 = read_matrix(blocks, "layer1");
  w.layer2 = read_matrix(blocks, "layer2");
  try {
    w.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("weights: ") + e.what());
  }
  return w;
}

}  // namespace rramcim::predictor
