#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <set>

#include "rramcim/eegdata.hpp"

namespace rramcim::eeg {

// --------------------------------------------------------- annotations ----

namespace {

std::optional<double> parse_clock(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) return std::nullopt;
  try {
    return parse_int(parts[0], "hour") * 3600.0 + parse_int(parts[1], "minute") * 60.0 +
           parse_int(parts[2], "second");
  } catch (const DataError&) {
    return std::nullopt;
  }
}

bool is_separator(const std::string& line) {
  return !line.empty() && std::all_of(line.begin(), line.end(), [](char c) { return c == '*' || c == '-' || c == '='; });
}

}  // namespace

std::vector<SummaryFile> parse_annotations(std::string_view text) {
  static const std::regex seizure_re(R"(^Seizure(?:\s+\d+)?\s+(Start|End)\s+Time\s*:\s*([0-9.]+)\s*(?:seconds|secs|s)?\s*$)",
                                     std::regex::icase);
  std::vector<SummaryFile> files;
  std::vector<int> declared;
  std::optional<double> pending_start;
  int line_no = 0;

  auto fail = [&](const std::string& why) -> DataError {
    return DataError("summary line " + std::to_string(line_no) + ": " + why);
  };
  auto close_block = [&]() {
    if (files.empty()) return;
    if (pending_start) throw fail("seizure start without end in " + files.back().file_name);
    if (declared.back() >= 0 && static_cast<std::size_t>(declared.back()) != files.back().seizures.size())
      throw fail("seizure count mismatch in " + files.back().file_name);
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const std::string line = trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty() || is_separator(line)) continue;

    std::smatch m;
    if (std::regex_match(line, m, seizure_re)) {
      if (files.empty()) throw fail("seizure line outside a file block");
      const double t = parse_double(m[2].str(), "summary line " + std::to_string(line_no));
      if (std::tolower(static_cast<unsigned char>(m[1].str()[0])) == 's') {
        if (pending_start) throw fail("seizure start without end");
        pending_start = t;
      } else {
        if (!pending_start) throw fail("seizure end without start");
        if (t < *pending_start) throw fail("invalid interval");
        files.back().seizures.push_back({*pending_start, t});
        pending_start.reset();
      }
      continue;
    }

    const auto colon = line.find(':');
    if (colon == std::string::npos) throw fail("unparseable line '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, colon));
    const std::string value = trim(std::string_view(line).substr(colon + 1));
    if (key == "File Name") {
      close_block();
      files.push_back({value, std::nullopt, std::nullopt, {}});
      declared.push_back(-1);
    } else if (key == "File Start Time" || key == "File End Time") {
      if (files.empty()) throw fail("file time outside a file block");
      const auto clock = parse_clock(value);
      if (!clock) throw fail("unparseable clock '" + value + "'");
      (key == "File Start Time" ? files.back().clock_start : files.back().clock_end) = clock;
    } else if (key == "Number of Seizures in File") {
      if (files.empty()) throw fail("seizure count outside a file block");
      try {
        declared.back() = static_cast<int>(parse_int(value, "seizure count"));
      } catch (const DataError&) {
        throw fail("unparseable seizure count '" + value + "'");
      }
    } else if (key.rfind("Seizure", 0) == 0) {
      throw fail("unparseable seizure line '" + line + "'");
    } else if (key.rfind("Channel", 0) == 0 || key == "Data Sampling Rate") {
      // montage listing and sampling rate; channels are matched from the EDF header
    } else {
      throw fail("unparseable line '" + line + "'");
    }
  }
  close_block();
  return files;
}

std::vector<double> file_offsets(std::span<const SummaryFile> files) {
  // All times below are absolute clock seconds, counting days from the first file.
  std::vector<double> offsets;
  double day = 0.0;
  std::optional<double> origin, prev_end;
  for (const auto& f : files) {
    double start = 0.0;
    if (f.clock_start) {
      start = *f.clock_start + day;
      if (prev_end && start + 1.0 < *prev_end) {
        day += 86400.0;
        start += 86400.0;
      }
    } else if (prev_end) {
      start = *prev_end;
    } else {
      throw DataError("summary: " + f.file_name + " has no start time");
    }
    if (!origin) origin = start;
    offsets.push_back(start - *origin);
    prev_end.reset();
    if (f.clock_end) {
      double end = *f.clock_end + day;
      while (end < start) end += 86400.0;
      prev_end = end;
    }
  }
  return offsets;
}

std::vector<Interval> merge_seizures(std::span<const Interval> intervals, double gap) {
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.start < out.back().start) throw InvalidArgument("merge_seizures: intervals not sorted");
    if (!out.empty() && iv.start - out.back().end <= gap)
      out.back().end = std::max(out.back().end, iv.end);
    else
      out.push_back(iv);
  }
  return out;
}

// ------------------------------------------------------------ channels ----

namespace {

std::string normalize_label(std::string_view label) {
  std::string out;
  for (char c : label) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return trim(out);
}

}  // namespace

Recording select_channels(const Recording& recording) {
  Recording out = recording;
  out.labels.clear();
  out.samples.clear();
  std::vector<std::string> missing;
  for (auto wanted : kChannels) {
    const std::string want = normalize_label(wanted);
    std::optional<std::size_t> hit;
    for (std::size_t c = 0; c < recording.labels.size() && !hit; ++c)
      if (normalize_label(recording.labels[c]) == want) hit = c;
    for (std::size_t c = 0; c < recording.labels.size() && !hit; ++c)
      if (normalize_label(recording.labels[c]) == want + "-0") hit = c;
    if (!hit) {
      missing.emplace_back(wanted);
      continue;
    }
    out.labels.emplace_back(wanted);
    out.samples.push_back(recording.samples[*hit]);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("recording " + recording.file_id + " is missing channels: " + list);
  }
  return out;
}

Recording parse_csv(std::string_view text, std::string patient_id, std::string file_id) {
  Recording rec;
  rec.patient_id = std::move(patient_id);
  rec.file_id = std::move(file_id);
  std::vector<double> times;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const std::string line = trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (rec.labels.empty()) {
      if (cells.size() < 2) throw DataError("csv: header needs a time column and at least one channel");
      for (std::size_t c = 1; c < cells.size(); ++c) rec.labels.push_back(trim(cells[c]));
      rec.samples.assign(rec.labels.size(), {});
      continue;
    }
    if (cells.size() != rec.labels.size() + 1)
      throw DataError("csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(rec.labels.size() + 1) + " columns");
    const std::string where = "csv line " + std::to_string(line_no);
    times.push_back(parse_double(cells[0], where));
    for (std::size_t c = 1; c < cells.size(); ++c) rec.samples[c - 1].push_back(parse_double(cells[c], where));
  }
  if (rec.labels.empty()) throw DataError("csv: missing header");
  if (times.size() < 2) throw DataError("csv: need at least two samples to infer the sampling rate");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw DataError("csv: time column must increase");
  rec.sampling_rate = std::round(1.0 / dt * 1e6) / 1e6;
  rec.start_time = times[0];
  return rec;
}

std::string to_csv(const Recording& recording) {
  std::string out = "time";
  for (const auto& l : recording.labels) out += "," + l;
  out += "\n";
  for (std::size_t k = 0; k < recording.sample_count(); ++k) {
    out += format_double(recording.start_time + static_cast<double>(k) / recording.sampling_rate);
    for (const auto& ch : recording.samples) out += "," + format_double(ch[k]);
    out += "\n";
  }
  return out;
}

// -------------------------------------------------------------- labels ----

std::string_view to_string(Label label) {
  return label == Label::preictal ? "preictal" : "interictal";
}

std::string LabeledWindow::id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "@%012.3f", window_start);
  return patient_id + buf;
}

std::vector<LabeledWindow> label_windows(std::span<const Recording> recordings,
                                         std::span<const Interval> seizures,
                                         const LabelConfig& config) {
  std::vector<LabeledWindow> out;
  const double len = config.window_seconds;
  for (const auto& rec : recordings) {
    const auto n = static_cast<std::size_t>(std::llround(len * rec.sampling_rate));
    const double rec_end = rec.start_time + rec.duration();
    for (auto g = static_cast<long long>(std::ceil(rec.start_time / len - 1e-9));; ++g) {
      const double s = static_cast<double>(g) * len;
      if (s + len > rec_end + 1e-9) break;
      const auto first = static_cast<std::size_t>(std::llround((s - rec.start_time) * rec.sampling_rate));
      if (first + n > rec.sample_count()) break;

      bool ictal = false, far = true;
      int preictal_of = -1;
      for (std::size_t m = 0; m < seizures.size(); ++m) {
        const auto& sz = seizures[m];
        if (s < sz.end && s + len > sz.start) ictal = true;
        if (!(s + len <= sz.start - config.interictal_gap || s >= sz.end + config.interictal_gap)) far = false;
        if (preictal_of < 0 && s >= sz.start - config.horizon && s + len <= sz.start)
          preictal_of = static_cast<int>(m);
      }

      LabeledWindow w;
      if (preictal_of >= 0 && !ictal) {
        w.label = Label::preictal;
        w.seizure_index = preictal_of;
        w.seizure_onset = seizures[static_cast<std::size_t>(preictal_of)].start;
      } else if (far) {
        w.label = Label::interictal;
      } else {
        continue;
      }
      w.patient_id = rec.patient_id;
      w.file_id = rec.file_id;
      w.window_start = s;
      if (config.keep_samples) {
        w.samples.reserve(rec.samples.size());
        for (const auto& ch : rec.samples)
          w.samples.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(first),
                                 ch.begin() + static_cast<std::ptrdiff_t>(first + n));
      }
      out.push_back(std::move(w));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.window_start < b.window_start; });
  return out;
}

PatientSummary summarize_patient(std::string patient_id, std::span<const Interval> recorded,
                                 std::span<const Interval> merged_seizures, double interictal_gap) {
  PatientSummary out;
  out.patient_id = std::move(patient_id);
  out.seizures.assign(merged_seizures.begin(), merged_seizures.end());
  std::vector<Interval> exclusion;
  for (const auto& s : merged_seizures) exclusion.push_back({s.start - interictal_gap, s.end + interictal_gap});
  exclusion = merge_seizures(exclusion, 0.0);
  for (const auto& r : recorded) {
    out.recorded_seconds += r.end - r.start;
    double covered = 0.0;
    for (const auto& e : exclusion) covered += std::max(0.0, std::min(r.end, e.end) - std::max(r.start, e.start));
    out.interictal_seconds += (r.end - r.start) - covered;
  }
  return out;
}

std::vector<std::string> select_patients(std::span<const PatientSummary> patients,
                                         const SelectionRule& rule) {
  std::vector<std::string> out;
  for (const auto& p : patients)
    if (static_cast<int>(p.seizures.size()) >= rule.min_seizures &&
        p.interictal_seconds >= rule.min_interictal_seconds)
      out.push_back(p.patient_id);
  return out;
}

// ------------------------------------------------------------ folds ----

std::vector<Fold> leave_one_seizure_out(std::span<const LabeledWindow> windows) {
  std::set<int> seizure_ids;
  std::vector<std::size_t> interictal;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].label == Label::preictal)
      seizure_ids.insert(windows[i].seizure_index);
    else
      interictal.push_back(i);
  }
  if (seizure_ids.size() < 2) return {};
  std::stable_sort(interictal.begin(), interictal.end(), [&](auto a, auto b) {
    return windows[a].window_start < windows[b].window_start;
  });

  const std::vector<int> ids(seizure_ids.begin(), seizure_ids.end());
  const std::size_t n = ids.size();
  std::vector<int> chunk_of(windows.size(), -1);
  for (std::size_t r = 0; r < interictal.size(); ++r)
    chunk_of[interictal[r]] = static_cast<int>(r * n / interictal.size());

  std::vector<Fold> folds;
  for (std::size_t k = 0; k < n; ++k) {
    Fold fold;
    fold.test_seizure = ids[k];
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const bool test = windows[i].label == Label::preictal ? windows[i].seizure_index == ids[k]
                                                            : chunk_of[i] == static_cast<int>(k);
      (test ? fold.test : fold.train).push_back(i);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace rramcim::eeg
