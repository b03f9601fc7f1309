#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rramcim/common.hpp"
#include "rramcim/waveform.hpp"

namespace rramcim::eeg {

/// The 18 bipolar montage channels, in array row/column order.
inline constexpr std::array<std::string_view, 18> kChannels = {
    "FP1-F3", "F3-C3", "C3-P3", "P3-O1", "FP2-F4", "F4-C4", "C4-P4", "P4-O2", "FP1-F7",
    "F7-T7",  "T7-P7", "P7-O1", "FP2-F8", "F8-T8", "T8-P8", "P8-O2", "FZ-CZ", "CZ-PZ"};

inline constexpr double kWindowSeconds = 3.0;
inline constexpr double kMergeGapSeconds = 30.0 * 60.0;
inline constexpr double kInterictalGapSeconds = 4.0 * 3600.0;
inline constexpr double kDefaultHorizonSeconds = 30.0 * 60.0;

struct Interval {
  double start = 0.0;  // s
  double end = 0.0;    // s
  bool operator==(const Interval&) const = default;
};

struct Recording {
  std::string patient_id;
  std::string file_id;
  std::vector<std::string> labels;
  double sampling_rate = 256.0;
  waveform::MultiChannel samples;  // µV, channel-major
  double start_time = 0.0;         // s on the patient timeline
  std::vector<Interval> seizures;  // s, relative to the recording start

  std::size_t sample_count() const { return samples.empty() ? 0 : samples[0].size(); }
  double duration() const { return static_cast<double>(sample_count()) / sampling_rate; }
};

// ---------------------------------------------------------------- EDF ----

/// Decodes an EDF (or continuous EDF+) file. Samples are calibrated to µV
/// from the per-signal physical/digital ranges; "EDF Annotations" signals
/// are skipped. All remaining signals must share one sampling rate.
Recording parse_edf(std::span<const std::uint8_t> bytes);
Recording read_edf(const std::string& path);

struct EdfSignalSpec {
  std::string label;
  std::string physical_dimension = "uV";
  double physical_min = -3276.8;
  double physical_max = 3276.7;
  int digital_min = -32768;
  int digital_max = 32767;
};

/// Writes a plain EDF file; used to build fixtures and by exporters.
/// `digital` holds raw 16-bit samples per signal, record_seconds per record.
std::vector<std::uint8_t> write_edf(std::span<const EdfSignalSpec> signals,
                                    const std::vector<std::vector<std::int16_t>>& digital,
                                    int samples_per_record, double record_seconds);

// --------------------------------------------------------- annotations ----

struct SummaryFile {
  std::string file_name;
  std::optional<double> clock_start;  // s since midnight, as printed
  std::optional<double> clock_end;
  std::vector<Interval> seizures;
};

/// Parses a CHB-MIT style "*-summary.txt". Lines outside file blocks
/// ("Channel 3: C3-P3", separators) are accepted and ignored.
std::vector<SummaryFile> parse_annotations(std::string_view text);

/// Places every file on one continuous timeline in seconds, rolling the
/// printed clock over midnight whenever it runs backwards.
std::vector<double> file_offsets(std::span<const SummaryFile> files);

/// Seizures starting no more than `gap` seconds after the previous end are
/// folded into it. Input must be sorted by start.
std::vector<Interval> merge_seizures(std::span<const Interval> intervals,
                                     double gap = kMergeGapSeconds);

// -------------------------------------------------------- preprocessing ----

/// 4th-order Butterworth low-pass applied forward and backward (zero phase).
Recording filter_lowpass(const Recording& recording, double cutoff_hz = 50.0);
std::vector<double> lowpass_zero_phase(std::span<const double> x, double sampling_rate,
                                       double cutoff_hz);

/// Reorders/filters channels to kChannels. Matching is case-insensitive and
/// tolerates CHB-MIT's "-0" suffix on duplicated labels. Throws DataError
/// listing every missing label.
Recording select_channels(const Recording& recording);

/// "time,<label>,..." header then one row per sample. The sampling rate is
/// taken from the first two time stamps.
Recording parse_csv(std::string_view text, std::string patient_id, std::string file_id);
std::string to_csv(const Recording& recording);

// -------------------------------------------------------------- labels ----

enum class Label : std::uint8_t { interictal = 0, preictal = 1 };
std::string_view to_string(Label label);

struct LabeledWindow {
  std::string patient_id;
  std::string file_id;
  double window_start = 0.0;  // s on the patient timeline
  Label label = Label::interictal;
  int seizure_index = -1;     // merged seizure this preictal window precedes
  double seizure_onset = 0.0; // s on the patient timeline, preictal only
  waveform::MultiChannel samples;

  std::string id() const;
};

struct LabelConfig {
  double horizon = kDefaultHorizonSeconds;
  double interictal_gap = kInterictalGapSeconds;
  double window_seconds = kWindowSeconds;
  bool keep_samples = true;
};

/// Cuts non-overlapping windows on a grid anchored at t = 0 of the patient
/// timeline. A window is preictal when it lies inside [onset - horizon, onset)
/// of a merged seizure and overlaps no seizure; interictal when it is at
/// least interictal_gap away from every seizure; dropped otherwise.
/// `seizures` are absolute, merged, and sorted.
std::vector<LabeledWindow> label_windows(std::span<const Recording> recordings,
                                         std::span<const Interval> seizures,
                                         const LabelConfig& config = {});

struct PatientSummary {
  std::string patient_id;
  std::vector<Interval> seizures;  // absolute, merged
  double recorded_seconds = 0.0;
  double interictal_seconds = 0.0;
};

/// Interictal time: recorded time at least `interictal_gap` from any seizure.
PatientSummary summarize_patient(std::string patient_id, std::span<const Interval> recorded,
                                 std::span<const Interval> merged_seizures,
                                 double interictal_gap = kInterictalGapSeconds);

struct SelectionRule {
  int min_seizures = 2;
  double min_interictal_seconds = 3.0 * 3600.0;
};

std::vector<std::string> select_patients(std::span<const PatientSummary> patients,
                                         const SelectionRule& rule = {});

// ------------------------------------------------------------ folds ----

struct Fold {
  int test_seizure = 0;
  std::vector<std::size_t> train;  // indices into the window list
  std::vector<std::size_t> test;
};

/// Leave-one-seizure-out over one patient's windows. Fold k tests on the
/// preictal windows of seizure k plus the k-th of n chronological chunks of
/// interictal windows; everything else trains.
std::vector<Fold> leave_one_seizure_out(std::span<const LabeledWindow> windows);

// ---------------------------------------------------------- synthetic ----

struct SyntheticSegment {
  double start = 0.0;  // s, relative to the recording
  double end = 0.0;
  double rho = 0.0;
};

struct SyntheticProfile {
  std::string patient_id = "syn01";
  std::string file_id = "syn01_01";
  std::size_t channels = 18;
  double sampling_rate = 256.0;
  double duration = 60.0;    // s
  double start_time = 0.0;   // s on the patient timeline
  double rho = 0.0;          // baseline pairwise correlation
  double ar_coefficient = 0.9;
  double amplitude_uv = 50.0;
  std::vector<SyntheticSegment> regimes;  // override rho inside each segment
  std::vector<Interval> seizures;         // relative to the recording start
};

/// Colored-noise EEG: x_c = sqrt(rho) * s + sqrt(1 - rho) * e_c with shared
/// and private unit-variance AR(1) sources, so every channel pair has
/// correlation rho. Deterministic per seed.
Recording synthesize(const SyntheticProfile& profile, std::uint64_t seed);

}  // namespace rramcim::eeg
