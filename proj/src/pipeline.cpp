#include "rramcim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rramcim/features.hpp"

namespace rramcim::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PatientData load_patient(const fs::path& dir, const std::string& id) {
  const fs::path summary_path = dir / (id + "-summary.txt");
  const auto files = eeg::parse_annotations(read_text(summary_path));
  const auto offsets = eeg::file_offsets(files);
  PatientData p;
  p.patient_id = id;
  std::vector<eeg::Interval> seizures;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const fs::path edf = dir / files[f].file_name;
    fs::path csv = edf;
    csv.replace_extension(".csv");
    eeg::Recording rec;
    if (fs::exists(edf)) {
      rec = eeg::read_edf(edf.string());
    } else if (fs::exists(csv)) {
      rec = eeg::parse_csv(read_text(csv), id, edf.stem().string());
    } else {
      throw DataError("missing recording " + edf.string());
    }
    rec = eeg::select_channels(rec);
    rec.patient_id = id;
    rec.file_id = edf.stem().string();
    rec.start_time = offsets[f];
    rec.seizures = files[f].seizures;
    for (const auto& s : files[f].seizures) seizures.push_back({s.start + offsets[f], s.end + offsets[f]});
    p.recordings.push_back(std::move(rec));
  }
  std::sort(seizures.begin(), seizures.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  p.seizures = eeg::merge_seizures(seizures);
  return p;
}

}  // namespace

std::vector<PatientData> load_chbmit(const std::string& root, const std::vector<std::string>& patients) {
  const fs::path base(root);
  if (!fs::is_directory(base)) throw DataError("dataset root not found: " + root);
  std::vector<std::string> ids = patients;
  if (ids.empty()) {
    for (const auto& entry : fs::directory_iterator(base)) {
      if (!entry.is_directory()) continue;
      const std::string id = entry.path().filename().string();
      if (fs::exists(entry.path() / (id + "-summary.txt"))) ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  std::vector<PatientData> out;
  for (const auto& id : ids) {
    const fs::path dir = base / id;
    if (!fs::is_directory(dir)) throw DataError("patient directory not found: " + dir.string());
    out.push_back(load_patient(dir, id));
  }
  return out;
}

std::vector<PatientData> synthetic_dataset(const SyntheticDataset& c, std::uint64_t seed) {
  if (c.patients < 1 || c.seizures < 1) throw InvalidArgument("synthetic dataset needs patients and seizures");
  const double spacing = c.spacing_hours * 3600.0;
  std::vector<PatientData> out;
  for (int p = 0; p < c.patients; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "syn%02d", p + 1);
    PatientData patient;
    patient.patient_id = id;
    int file = 0;
    auto profile = [&](double start, double duration, double rho) {
      eeg::SyntheticProfile prof;
      prof.patient_id = id;
      char fid[32];
      std::snprintf(fid, sizeof fid, "%s_%02d", id, ++file);
      prof.file_id = fid;
      prof.sampling_rate = c.sampling_rate;
      prof.start_time = start;
      prof.duration = duration;
      prof.rho = rho;
      return prof;
    };
    for (int k = 0; k < c.seizures; ++k) {
      const double onset = (k + 1) * spacing;
      patient.recordings.push_back(
          eeg::synthesize(profile(onset - 0.5 * spacing, c.interictal_seconds, c.rho_interictal), seed));
      auto prof = profile(onset - c.preictal_seconds, c.preictal_seconds + c.ictal_seconds, c.rho_preictal);
      prof.seizures = {{c.preictal_seconds, c.preictal_seconds + c.ictal_seconds}};
      prof.regimes = {{c.preictal_seconds, c.preictal_seconds + c.ictal_seconds, c.rho_ictal}};
      patient.recordings.push_back(eeg::synthesize(prof, seed));
      patient.seizures.push_back({onset, onset + c.ictal_seconds});
    }
    const double last = c.seizures * spacing;
    patient.recordings.push_back(
        eeg::synthesize(profile(last + 0.5 * spacing, c.interictal_seconds, c.rho_interictal), seed));
    out.push_back(std::move(patient));
  }
  return out;
}

std::vector<eeg::LabeledWindow> prepare_windows(const PatientData& patient, const RunConfig& config) {
  eeg::LabelConfig lc;
  lc.horizon = config.horizon;
  lc.window_seconds = config.window_seconds;
  std::vector<eeg::LabeledWindow> windows;
  for (const auto& rec : patient.recordings) {
    const auto filtered = config.lowpass_hz > 0.0 ? eeg::filter_lowpass(rec, config.lowpass_hz) : rec;
    auto part = eeg::label_windows(std::span(&filtered, 1), patient.seizures, lc);
    std::move(part.begin(), part.end(), std::back_inserter(windows));
  }
  std::stable_sort(windows.begin(), windows.end(),
                   [](const auto& a, const auto& b) { return a.window_start < b.window_start; });

  const auto interictal = std::count_if(windows.begin(), windows.end(),
                                        [](const auto& w) { return w.label == eeg::Label::interictal; });
  const auto cap = config.max_interictal_windows;
  if (cap > 0 && static_cast<std::size_t>(interictal) > cap) {
    std::vector<eeg::LabeledWindow> kept;
    std::size_t rank = 0, taken = 0;
    for (auto& w : windows) {
      if (w.label == eeg::Label::preictal) {
        kept.push_back(std::move(w));
        continue;
      }
      // keep rank r when floor(r * cap / n) advances
      if (rank * cap / static_cast<std::size_t>(interictal) == taken) {
        kept.push_back(std::move(w));
        ++taken;
      }
      ++rank;
    }
    windows = std::move(kept);
  }
  return windows;
}

std::vector<waveform::EncodingConfig> calibrate(std::span<const waveform::MultiChannel> windows, double k_sigma,
                                               const waveform::EncodingConfig& base) {
  try {
    return waveform::calibrate_thresholds(windows, k_sigma, base);
  } catch (const InvalidArgument& e) {
    if (std::string_view(e.what()).find("zero variance") == std::string_view::npos) throw;
  }
  std::vector<waveform::EncodingConfig> out;
  const std::size_t channels = windows[0].size();
  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<waveform::MultiChannel> one;
    one.reserve(windows.size());
    for (const auto& w : windows) one.push_back({w[c]});
    try {
      out.push_back(waveform::calibrate_thresholds(one, k_sigma, base)[0]);
    } catch (const InvalidArgument& e) {
      if (std::string_view(e.what()).find("zero variance") == std::string_view::npos) throw;
      // Flat channel: thresholds straddle the constant so no sample crosses either.
      const double level = one[0][0].empty() ? 0.0 : one[0][0][0];
      const double gap = 1e-9 * std::max(1.0, std::abs(level));
      waveform::EncodingConfig cfg = base;
      cfg.v_pth = level + gap;
      cfg.v_nth = level - gap;
      out.push_back(cfg);
    }
  }
  return out;
}

PatientResult run_patient(const PatientData& patient, const RunConfig& config) {
  PatientResult result;
  result.patient_id = patient.patient_id;
  const auto windows = prepare_windows(patient, config);
  const auto folds = eeg::leave_one_seizure_out(windows);
  if (folds.empty()) {
    result.skipped = true;
    result.notice = patient.patient_id + ": skipped, needs preictal windows for at least 2 seizures";
    return result;
  }
  std::vector<predictor::ScoredWindow> all;
  std::size_t agree = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fold = folds[f];
    FoldResult fr;
    fr.test_seizure = fold.test_seizure;

    std::vector<waveform::MultiChannel> train_samples;
    for (auto i : fold.train) train_samples.push_back(windows[i].samples);
    fr.thresholds = calibrate(train_samples, config.k_sigma, config.encoding);

    features::ExtractionConfig ec;
    ec.encoding = fr.thresholds;
    ec.params = config.params;
    ec.variability = config.variability;
    ec.seed = config.seed;

    std::vector<eeg::LabeledWindow> fold_windows;
    for (auto i : fold.train) fold_windows.push_back(windows[i]);
    for (auto i : fold.test) fold_windows.push_back(windows[i]);
    const auto maps = features::extract_all(fold_windows, ec, config.threads);

    std::vector<predictor::Example> examples;
    std::vector<Matrix> calibration;
    for (std::size_t k = 0; k < fold.train.size(); ++k) {
      examples.push_back({maps[k].values, fold_windows[k].label});
      calibration.push_back(maps[k].values);
    }
    const std::uint64_t fold_seed = fnv1a(patient.patient_id + "/fold/" + std::to_string(fold.test_seizure)) ^ config.seed;
    fr.weights = predictor::train(examples, config.params, config.train, fold_seed);
    fr.weights.config_hash = ec.hash();

    predictor::DeployOptions dopt;
    dopt.adc_bits = config.adc_bits;
    dopt.compute_voltage = config.train.compute_voltage;
    dopt.read_voltage = config.train.read_voltage;
    dopt.calibration_maps = std::move(calibration);
    const auto model = predictor::deploy(fr.weights, config.params, dopt);

    for (std::size_t k = fold.train.size(); k < fold_windows.size(); ++k) {
      const auto& w = fold_windows[k];
      predictor::ScoredWindow s;
      s.start = w.window_start;
      s.truth = w.label;
      s.seizure_index = w.seizure_index;
      s.seizure_onset = w.seizure_onset;
      s.predicted = predictor::predict_window(model, maps[k]);
      const auto float_label = predictor::predict_float(fr.weights, maps[k].values, config.params, config.train);
      if (float_label == s.predicted) ++agree;
      fr.float_predictions.push_back(float_label);
      fr.window_ids.push_back(w.id());
      fr.scored.push_back(s);
      all.push_back(s);
    }
    result.folds.push_back(std::move(fr));
  }
  predictor::AlarmConfig alarm;
  alarm.horizon = config.horizon;
  alarm.window_seconds = config.window_seconds;
  result.metrics = predictor::score(patient.patient_id, all, alarm);
  result.float_agreement = all.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(all.size());
  return result;
}

RunResult run(const std::vector<PatientData>& patients, const RunConfig& config, bool select,
              const Progress& progress) {
  RunResult out;
  std::vector<const PatientData*> order;
  for (const auto& p : patients) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](auto a, auto b) { return a->patient_id < b->patient_id; });

  std::vector<predictor::PatientMetrics> metrics;
  for (const auto* p : order) {
    if (select) {
      std::vector<eeg::Interval> recorded;
      for (const auto& r : p->recordings) recorded.push_back({r.start_time, r.start_time + r.duration()});
      const auto summary = eeg::summarize_patient(p->patient_id, recorded, p->seizures);
      if (eeg::select_patients(std::span(&summary, 1)).empty()) {
        PatientResult skipped;
        skipped.patient_id = p->patient_id;
        skipped.skipped = true;
        skipped.notice = p->patient_id + ": skipped, fewer than 2 seizures or under 3 h interictal";
        if (progress) progress(skipped.notice);
        out.patients.push_back(std::move(skipped));
        continue;
      }
    }
    auto r = run_patient(*p, config);
    if (progress) progress(r.skipped ? r.notice : p->patient_id + ": " + std::to_string(r.folds.size()) + " folds done");
    if (!r.skipped) metrics.push_back(r.metrics);
    out.patients.push_back(std::move(r));
  }
  out.metrics = predictor::summarize(std::move(metrics));
  return out;
}

}  // namespace rramcim::pipeline
