#pragma once

// Two-layer seizure predictor with non-negative weights in [0, 1].
//
// Forward model (shared by training and the crossbar deployment):
//   x_ij    = I(w_ij, V_c) / I(0, V_c)           stored feature, w from the map
//   h_j     = sum_i W_ij * x_ij                   first layer, on the extraction array
//   r_j     = relu(h_j)
//   z_c     = s * sum_j r_j * u(V_jc) / (n * n)   second layer, u(v) = I(v, V_c) / I(1, V_c)
// Column 0 scores interictal, column 1 preictal; ties go to interictal. The
// scalar s > 0 is a training-only temperature and never reaches hardware
// because argmax ignores it.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rramcim/common.hpp"
#include "rramcim/correlation_map.hpp"
#include "rramcim/crossbar.hpp"
#include "rramcim/device.hpp"
#include "rramcim/eegdata.hpp"

namespace rramcim::predictor {

using eeg::Label;

struct NetworkWeights {
  Matrix layer1;  // channels x channels
  Matrix layer2;  // channels x 2
  int bit_width = 8;
  double scale = crossbar::kComputeVoltage;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string config_hash;

  void validate() const;
};

struct Example {
  Matrix map;  // conductances at the read voltage, as read from the array
  Label label = Label::interictal;
};

struct TrainConfig {
  int steps = 3000;
  int batch_size = 128;
  double learning_rate = 0.05;
  bool cosine_decay = true;  // lr follows a half cosine from learning_rate to 0
  double max_temperature = 1e4;
  // Relative noise on hidden units and logits during training, sized like
  // the deployed path's 8-bit ADC and re-quantization errors.
  double hidden_noise = 0.02;
  double logit_noise = 0.02;
  bool quantization_aware = true;  // forward pass sees the 8-bit layer-1 codes
  double compute_voltage = crossbar::kComputeVoltage;
  double read_voltage = device::kReadVoltage;
};

/// Converts a conductance map into the stored feature x_ij.
Matrix feature_matrix(const Matrix& map, const device::DeviceParams& params,
                      double read_voltage = device::kReadVoltage,
                      double compute_voltage = crossbar::kComputeVoltage);

NetworkWeights initial_weights(std::size_t channels, std::uint64_t seed);

/// Projected Adam on softmax cross-entropy with class-balanced mini-batches.
/// Training injects deployment-sized noise and, by default, runs the forward
/// pass on the quantized layer-1 weights (straight-through gradients).
/// Examples are put into a canonical order first, so the result depends only
/// on the example multiset and the seed.
NetworkWeights train(std::span<const Example> examples, const device::DeviceParams& params,
                     const TrainConfig& config, std::uint64_t seed);

struct FloatOutput {
  std::vector<double> hidden;  // r_j
  std::vector<double> logits;  // z_c
};

FloatOutput forward(const NetworkWeights& weights, const Matrix& features,
                    const device::DeviceParams& params,
                    double compute_voltage = crossbar::kComputeVoltage);

Label decide(double interictal_score, double preictal_score);
Label predict_float(const NetworkWeights& weights, const Matrix& map,
                    const device::DeviceParams& params, const TrainConfig& config = {});

struct QuantizationStats {
  double layer1_max_error = 0.0;
  double layer1_mean_error = 0.0;
  double layer2_max_error = 0.0;
  double layer2_mean_error = 0.0;
};

struct DeployOptions {
  int adc_bits = 8;
  double compute_voltage = crossbar::kComputeVoltage;
  double headroom = 1.1;
  // Training maps used to set the ADC references: each MUX-selected column
  // gets headroom x its largest bit-plane current, and the hidden full scale
  // is headroom x the largest hidden value. Empty means one shared worst-case
  // reference, rows * I(w = 1, V_c).
  std::vector<Matrix> calibration_maps;
  double read_voltage = device::kReadVoltage;
};

struct DeployedModel {
  device::DeviceParams params;
  crossbar::BitSerialWeights layer1;
  crossbar::CrossbarArray layer2;
  crossbar::AdcConfig adc1;
  crossbar::AdcConfig adc2;
  double hidden_full_scale = 0.0;  // A, maps to the top hidden code
  double compute_voltage = crossbar::kComputeVoltage;
  double read_voltage = device::kReadVoltage;
  QuantizationStats stats;
};

DeployedModel deploy(const NetworkWeights& weights, const device::DeviceParams& params,
                     const DeployOptions& options = {});

struct Inference {
  Label label = Label::interictal;
  crossbar::LayerOutput layer1;
  std::vector<std::uint32_t> hidden_codes;
  crossbar::LayerOutput layer2;
};

/// Full crossbar path on an extraction array that already holds a map.
Inference infer(const DeployedModel& model, const crossbar::CrossbarArray& extraction_array);
Label predict_window(const DeployedModel& model, const CorrelationMap& map);

// ------------------------------------------------------------ metrics ----

struct ScoredWindow {
  double start = 0.0;
  Label truth = Label::interictal;
  Label predicted = Label::interictal;
  int seizure_index = -1;
  double seizure_onset = 0.0;
};

struct AlarmConfig {
  double refractory = 30.0 * 60.0;
  double window_seconds = eeg::kWindowSeconds;
  double horizon = eeg::kDefaultHorizonSeconds;
};

struct PatientMetrics {
  std::string patient_id;
  int seizures = 0;
  int predicted_seizures = 0;
  double sensitivity = 0.0;  // percent
  int false_alarms = 0;
  double interictal_hours = 0.0;
  double fpr_per_hour = 0.0;
  double predicted_time = 0.0;  // minutes
  std::size_t windows = 0;
  std::size_t correct_windows = 0;

  double window_accuracy() const {
    return windows ? static_cast<double>(correct_windows) / static_cast<double>(windows) : 0.0;
  }
};

/// Event-level scoring. A seizure counts as predicted when any of its
/// preictal windows fires. Interictal alarms are counted with a refractory
/// period; FPR/h divides by the interictal time covered by windows.
PatientMetrics score(std::string patient_id, std::span<const ScoredWindow> windows,
                     const AlarmConfig& alarm = {});

struct PredictionMetrics {
  std::vector<PatientMetrics> patients;
  double mean_sensitivity = 0.0;
  double mean_fpr_per_hour = 0.0;
  double mean_predicted_time = 0.0;
};

PredictionMetrics summarize(std::vector<PatientMetrics> patients);

/// Delimited records (one line per patient plus an "average" line).
std::string metrics_to_text(const PredictionMetrics& metrics, const std::string& config_hash);
/// Table in the "Patient / Predicted Time / Sensitivity / FPR" layout.
std::string metrics_report(const PredictionMetrics& metrics);

// Weight file:
//   # rramcim network weights
//   # bit_width=8 scale=1 temperature=.. seed=.. config=..
//   layer1 <rows> <cols>
//   <rows lines>
//   layer2 <rows> <cols>
//   <rows lines>
std::string weights_to_text(const NetworkWeights& weights);
NetworkWeights weights_from_text(const std::string& text);

}  // namespace rramcim::predictor
