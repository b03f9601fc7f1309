#pragma once

// Dataset loading and the per-patient leave-one-seizure-out run:
// filter -> label -> (per fold) calibrate thresholds on training windows ->
// extract -> train -> deploy -> predict test windows -> score.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rramcim/correlation_map.hpp"
#include "rramcim/device.hpp"
#include "rramcim/eegdata.hpp"
#include "rramcim/predictor.hpp"
#include "rramcim/waveform.hpp"

namespace rramcim::pipeline {

struct PatientData {
  std::string patient_id;
  std::vector<eeg::Recording> recordings;  // start_time on the patient timeline
  std::vector<eeg::Interval> seizures;     // absolute, merged, sorted
};

/// Reads <root>/<patient>/<patient>-summary.txt and the files it lists
/// (EDF, or a CSV with the same stem). `patients` empty means every
/// directory that has a summary file.
std::vector<PatientData> load_chbmit(const std::string& root, const std::vector<std::string>& patients);

struct SyntheticDataset {
  int patients = 2;
  int seizures = 3;
  double preictal_seconds = 120.0;   // recorded right before each onset
  double ictal_seconds = 30.0;
  double interictal_seconds = 120.0; // per interictal recording
  double spacing_hours = 12.0;       // between consecutive onsets
  double rho_interictal = 0.0;
  double rho_preictal = 0.8;
  double rho_ictal = 0.9;
  double sampling_rate = 256.0;
};

/// Seizure k of each patient sits at (k + 1) * spacing; an interictal
/// recording sits halfway between consecutive onsets (and one before the
/// first), so it is always well outside the 4 h exclusion zone.
std::vector<PatientData> synthetic_dataset(const SyntheticDataset& config, std::uint64_t seed);

struct RunConfig {
  double horizon = eeg::kDefaultHorizonSeconds;
  double window_seconds = eeg::kWindowSeconds;
  double lowpass_hz = 50.0;
  double k_sigma = 1.0;
  waveform::EncodingConfig encoding;  // amplitude and slot width; thresholds come from calibration
  device::DeviceParams params;
  device::Variability variability;
  predictor::TrainConfig train;
  int adc_bits = 8;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t max_interictal_windows = 0;  // 0 = keep all; otherwise evenly strided subset
};

/// Filtered, labeled windows for one patient (samples kept).
std::vector<eeg::LabeledWindow> prepare_windows(const PatientData& patient, const RunConfig& config);

/// calibrate_thresholds, except that a flat (zero-variance) channel gets
/// thresholds just either side of its constant value and stays silent.
std::vector<waveform::EncodingConfig> calibrate(std::span<const waveform::MultiChannel> windows, double k_sigma,
                                               const waveform::EncodingConfig& base);

struct FoldResult {
  int test_seizure = 0;
  std::vector<waveform::EncodingConfig> thresholds;
  predictor::NetworkWeights weights;
  std::vector<predictor::ScoredWindow> scored;      // deployed (crossbar) predictions
  std::vector<eeg::Label> float_predictions;        // same windows, float model
  std::vector<std::string> window_ids;
};

struct PatientResult {
  std::string patient_id;
  bool skipped = false;
  std::string notice;
  std::vector<FoldResult> folds;
  predictor::PatientMetrics metrics;
  double float_agreement = 0.0;  // fraction of test windows where deployed == float argmax
};

PatientResult run_patient(const PatientData& patient, const RunConfig& config);

using Progress = std::function<void(const std::string&)>;

struct RunResult {
  std::vector<PatientResult> patients;  // sorted by patient id
  predictor::PredictionMetrics metrics; // over patients that were not skipped
};

/// Applies the selection rule (>= 2 seizures, >= 3 h interictal) unless
/// `select` is false, then runs every remaining patient.
RunResult run(const std::vector<PatientData>& patients, const RunConfig& config, bool select = true,
              const Progress& progress = {});

}  // namespace rramcim::pipeline
