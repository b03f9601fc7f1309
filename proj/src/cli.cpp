#include "rramcim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rramcim/costmodel.hpp"
#include "rramcim/device.hpp"
#include "rramcim/features.hpp"
#include "rramcim/pipeline.hpp"
#include "rramcim/waveform.hpp"

namespace rramcim::cli {

namespace fs = std::filesystem;

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"data", "", "dataset root (<root>/<patient>/<patient>-summary.txt + EDF/CSV) or 'synthetic'"},
      {"out", "rramcim_out", "output directory; nothing is written anywhere else"},
      {"seed", "1", "master seed; every random stream derives from it"},
      {"patients", "", "comma-separated patient ids (empty = all)"},
      {"horizon_min", "30", "preictal horizon in minutes"},
      {"slot_ns", "40", "pulse slot width in ns"},
      {"k_sigma", "1", "encoding thresholds mu +/- k_sigma * sigma"},
      {"bits", "8", "ADC resolution in bits"},
      {"catalog", cost::default_catalog_path(), "component catalog for 'cost'"},
      {"channels", "18", "channel count for cost scaling"},
      {"window_s", "3", "window length in seconds"},
      {"amplitude", "0.8", "encoding pulse amplitude in V"},
      {"lowpass_hz", "50", "zero-phase low-pass cutoff (0 disables)"},
      {"steps", "3000", "training steps"},
      {"batch", "128", "training mini-batch size (half per class)"},
      {"lr", "0.05", "initial learning rate"},
      {"threads", "0", "extraction workers (0 = hardware concurrency)"},
      {"max_interictal", "0", "cap on interictal windows per patient (0 = all)"},
      {"sigma_dw", "0", "relative programming noise"},
      {"sigma_read", "0", "relative read noise"},
      {"alpha", "9e-7", "device alpha (A)"},
      {"beta", "4", "device beta (1/V)"},
      {"gamma", "2.8e-7", "device gamma (A)"},
      {"delta", "6", "device delta (1/V)"},
      {"lambda", "0.045", "device lambda (1/s)"},
      {"eta", "6", "device eta (1/V)"},
      {"synthetic_patients", "2", "patients in the synthetic dataset"},
      {"synthetic_seizures", "3", "seizures per synthetic patient"},
  };
  return k;
}

namespace {

bool known(const std::string& key) {
  return std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.name == key; });
}

class UsageError : public Error {
public:
  using Error::Error;
};

}  // namespace

Settings parse_config(const std::string& text) {
  Settings s;
  std::istringstream in(text);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(row) + ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (!known(key)) throw UsageError("config line " + std::to_string(row) + ": unknown key '" + key + "'");
    s[key] = trim(t.substr(eq + 1));
  }
  return s;
}

Settings layer(const Settings& file, const Settings& flags) {
  Settings s;
  for (const auto& k : keys()) s[k.name] = k.default_value;
  for (const auto& [k, v] : file) s[k] = v;
  for (const auto& [k, v] : flags) s[k] = v;
  return s;
}

std::string config_hash(const Settings& settings) {
  std::string text;
  for (const auto& [k, v] : settings)
    if (k != "out" && k != "threads") text += k + "=" + v + "\n";
  return hex64(fnv1a(text));
}

namespace {

struct Context {
  Settings s;
  std::string hash;
  fs::path out;
  std::ostream& log;

  double num(const std::string& key) const {
    try {
      return parse_double(s.at(key), key);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  long long integer(const std::string& key) const {
    try {
      return parse_int(s.at(key), key);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  std::string header() const { return "# config=" + hash + "\n"; }

  void write(const fs::path& rel, const std::string& body) const {
    const fs::path path = out / rel;
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << body;
  }
};

device::DeviceParams device_params(const Context& c) {
  device::DeviceParams p{c.num("alpha"), c.num("beta"), c.num("gamma"), c.num("delta"), c.num("lambda"), c.num("eta")};
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return p;
}

pipeline::RunConfig run_config(const Context& c) {
  pipeline::RunConfig rc;
  rc.horizon = c.num("horizon_min") * 60.0;
  rc.window_seconds = c.num("window_s");
  rc.lowpass_hz = c.num("lowpass_hz");
  rc.k_sigma = c.num("k_sigma");
  rc.encoding.pulse_amplitude = c.num("amplitude");
  rc.encoding.slot_width = c.num("slot_ns") * 1e-9;
  rc.params = device_params(c);
  rc.variability = {c.num("sigma_dw"), c.num("sigma_read")};
  rc.train.steps = static_cast<int>(c.integer("steps"));
  rc.train.batch_size = static_cast<int>(c.integer("batch"));
  rc.train.learning_rate = c.num("lr");
  rc.adc_bits = static_cast<int>(c.integer("bits"));
  rc.seed = static_cast<std::uint64_t>(c.integer("seed"));
  rc.threads = static_cast<unsigned>(std::max(0LL, c.integer("threads")));
  rc.max_interictal_windows = static_cast<std::size_t>(std::max(0LL, c.integer("max_interictal")));
  if (!(rc.horizon > 0) || !(rc.window_seconds > 0) || !(rc.k_sigma > 0) || rc.adc_bits < 1 || rc.adc_bits > 24 ||
      rc.train.batch_size < 2 || !(rc.encoding.slot_width > 0) || !(rc.encoding.pulse_amplitude > 0))
    throw UsageError("invalid run parameters (horizon, window, k_sigma, bits, batch, slot width, amplitude)");
  return rc;
}

std::vector<std::string> patient_filter(const Context& c) {
  std::vector<std::string> ids;
  for (const auto& p : split(c.s.at("patients"), ','))
    if (!trim(p).empty()) ids.push_back(trim(p));
  return ids;
}

bool is_synthetic(const Context& c) { return c.s.at("data") == "synthetic"; }

std::vector<pipeline::PatientData> load_data(const Context& c) {
  const std::string& data = c.s.at("data");
  if (data.empty()) throw UsageError("--data is required (a dataset root or 'synthetic')");
  const auto ids = patient_filter(c);
  if (!is_synthetic(c)) return pipeline::load_chbmit(data, ids);
  pipeline::SyntheticDataset sd;
  sd.patients = static_cast<int>(c.integer("synthetic_patients"));
  sd.seizures = static_cast<int>(c.integer("synthetic_seizures"));
  if (sd.patients < 1 || sd.seizures < 1) throw UsageError("synthetic dataset needs at least one patient and seizure");
  auto all = pipeline::synthetic_dataset(sd, static_cast<std::uint64_t>(c.integer("seed")));
  if (ids.empty()) return all;
  std::vector<pipeline::PatientData> out;
  for (auto& p : all)
    if (std::find(ids.begin(), ids.end(), p.patient_id) != ids.end()) out.push_back(std::move(p));
  if (out.empty()) throw DataError("no synthetic patient matches --patients");
  return out;
}

// ----------------------------------------------------------- commands ----

void cmd_characterize(const Context& c) {
  const auto params = device_params(c);
  // Positive staircase from a fresh device, then a negative one from where it ended.
  std::string iv = c.header() + "branch,voltage,current,w\n";
  const auto pos = device::iv_sweep(params, 0.0, 2.0, 200, 1e-6);
  const auto neg = device::iv_sweep(params, -2.0, 0.0, 200, 1e-6, {pos.back().w});
  for (const auto& p : pos) iv += "positive," + format_double(p.voltage) + "," + format_double(p.current) + "," + format_double(p.w) + "\n";
  for (const auto& p : neg) iv += "negative," + format_double(p.voltage) + "," + format_double(p.current) + "," + format_double(p.w) + "\n";
  c.write("iv.csv", iv);

  std::string ltp = c.header() + "pulse,w_1.6V,g_1.6V,w_0.8V,g_0.8V,w_ltd,g_ltd\n";
  device::DeviceState hi, lo, ltd{1.0};
  for (int k = 0; k <= 2000; ++k) {
    if (k > 0) {
      hi = device::step(hi, params, {1.6, 500e-9});
      lo = device::step(lo, params, {0.8, 500e-9});
      ltd = device::step(ltd, params, {-1.6, 500e-9});
    }
    ltp += std::to_string(k) + "," + format_double(hi.w) + "," + format_double(device::conductance(hi, params)) + "," +
           format_double(lo.w) + "," + format_double(device::conductance(lo, params)) + "," + format_double(ltd.w) +
           "," + format_double(device::conductance(ltd, params)) + "\n";
  }
  c.write("ltp.csv", ltp);

  std::string ov = c.header() + "dt_ns,delta_w,delta_g\n";
  for (int dt = -500; dt <= 500; dt += 50) {
    const auto r = device::overlap_response(params, 500e-9, 0.8, dt * 1e-9);
    ov += std::to_string(dt) + "," + format_double(r.delta_w) + "," + format_double(r.delta_g) + "\n";
  }
  c.write("overlap.csv", ov);

  const double g0 = device::overlap_response(params, 500e-9, 0.8, 0.0).delta_g;
  const double g500 = device::overlap_response(params, 500e-9, 0.8, 500e-9).delta_g;
  const double dw_hi = device::drift(params, {1.6, 500e-9});
  const double dw_lo = device::drift(params, {0.8, 500e-9});
  std::ostringstream sum;
  sum << c.header() << "dw_per_pulse_1.6V=" << format_double(dw_hi) << "\n"
      << "dw_per_pulse_0.8V=" << format_double(dw_lo) << "\n"
      << "dw_ratio=" << format_double(dw_hi / dw_lo) << "\n"
      << "overlap_dg_ratio_0_vs_500ns=" << format_double(g0 / g500) << "\n";
  c.write("summary.txt", sum.str());
  c.log << sum.str();
}

struct Prepared {
  std::string patient_id;
  std::vector<eeg::LabeledWindow> windows;
  std::vector<waveform::EncodingConfig> thresholds;
};

// Windows of every patient, thresholds calibrated on that patient's windows.
std::vector<Prepared> prepare(const Context& c) {
  const auto rc = run_config(c);
  std::vector<Prepared> out;
  for (const auto& p : load_data(c)) {
    Prepared pr{p.patient_id, pipeline::prepare_windows(p, rc), {}};
    if (pr.windows.empty()) {
      c.log << p.patient_id << ": no labeled windows\n";
      continue;
    }
    std::vector<waveform::MultiChannel> samples;
    for (const auto& w : pr.windows) samples.push_back(w.samples);
    pr.thresholds = pipeline::calibrate(samples, rc.k_sigma, rc.encoding);
    out.push_back(std::move(pr));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.patient_id < b.patient_id; });
  return out;
}

std::string thresholds_text(const Context& c, const std::vector<Prepared>& prepared) {
  std::string t = c.header() + "patient,channel,v_pth,v_nth\n";
  for (const auto& p : prepared)
    for (std::size_t ch = 0; ch < p.thresholds.size(); ++ch)
      t += p.patient_id + "," + std::string(eeg::kChannels[ch % eeg::kChannels.size()]) + "," +
           format_double(p.thresholds[ch].v_pth) + "," + format_double(p.thresholds[ch].v_nth) + "\n";
  return t;
}

void cmd_encode(const Context& c) {
  const auto prepared = prepare(c);
  std::string idx = c.header() + "window_id,patient,file,start_s,label,seizure,positive_pulses,negative_pulses\n";
  std::size_t n = 0;
  for (const auto& p : prepared)
    for (const auto& w : p.windows) {
      const auto enc = waveform::encode_window(w.samples, p.thresholds);
      std::size_t pos = 0, neg = 0;
      for (const auto& e : enc) {
        pos += e.positive.count();
        neg += e.negative.count();
      }
      idx += w.id() + "," + w.patient_id + "," + w.file_id + "," + format_double(w.window_start) + "," +
             std::string(eeg::to_string(w.label)) + "," + std::to_string(w.seizure_index) + "," + std::to_string(pos) +
             "," + std::to_string(neg) + "\n";
      ++n;
    }
  c.write("windows.csv", idx);
  c.write("thresholds.csv", thresholds_text(c, prepared));
  c.log << "encoded " << n << " windows\n";
}

void cmd_extract(const Context& c) {
  const auto rc = run_config(c);
  const auto prepared = prepare(c);
  std::string idx = c.header() + "window_id,label,file,mean_offdiag_siemens\n";
  std::size_t n = 0;
  for (const auto& p : prepared) {
    features::ExtractionConfig ec;
    ec.encoding = p.thresholds;
    ec.params = rc.params;
    ec.variability = rc.variability;
    ec.seed = rc.seed;
    const auto maps = features::extract_all(p.windows, ec, rc.threads);
    for (std::size_t k = 0; k < maps.size(); ++k) {
      auto map = maps[k];
      map.config_hash = c.hash;
      const std::string file = "maps/" + p.windows[k].id() + ".txt";
      c.write(file, to_matrix_text(map));
      double off = 0.0;
      const std::size_t ch = map.channels();
      for (std::size_t i = 0; i < ch; ++i)
        for (std::size_t j = 0; j < ch; ++j)
          if (i != j) off += map.values(i, j);
      off /= static_cast<double>(ch * (ch - 1));
      idx += p.windows[k].id() + "," + std::string(eeg::to_string(p.windows[k].label)) + "," + file + "," +
             format_double(off) + "\n";
      ++n;
    }
  }
  c.write("maps.csv", idx);
  c.write("thresholds.csv", thresholds_text(c, prepared));
  c.log << "extracted " << n << " maps\n";
}

pipeline::RunResult run_loso(const Context& c) {
  const auto rc = run_config(c);
  const auto data = load_data(c);
  if (is_synthetic(c)) c.log << "synthetic data: patient selection rule not applied\n";
  auto result = pipeline::run(data, rc, !is_synthetic(c), [&](const std::string& m) { c.log << m << "\n"; });
  std::string notices = c.header();
  for (const auto& p : result.patients)
    if (p.skipped) notices += p.notice + "\n";
  c.write("notices.txt", notices);
  return result;
}

void cmd_train(const Context& c) {
  const auto result = run_loso(c);
  std::string idx = c.header() + "patient,test_seizure,weights_file,temperature\n";
  for (const auto& p : result.patients)
    for (const auto& f : p.folds) {
      const std::string file = "weights/" + p.patient_id + "_seizure" + std::to_string(f.test_seizure) + ".txt";
      auto w = f.weights;
      w.config_hash = c.hash;
      c.write(file, predictor::weights_to_text(w));
      idx += p.patient_id + "," + std::to_string(f.test_seizure) + "," + file + "," + format_double(f.weights.temperature) + "\n";
    }
  c.write("weights.csv", idx);
}

void cmd_evaluate(const Context& c) {
  const auto result = run_loso(c);
  c.write("metrics.csv", predictor::metrics_to_text(result.metrics, c.hash));
  std::string report = c.header() + predictor::metrics_report(result.metrics);
  std::string preds = c.header() + "window_id,test_seizure,truth,deployed,float\n";
  for (const auto& p : result.patients) {
    if (p.skipped) continue;
    char line[160];
    std::snprintf(line, sizeof line, "%s: window accuracy %.4f, deployed/float agreement %.4f\n",
                  p.patient_id.c_str(), p.metrics.window_accuracy(), p.float_agreement);
    report += line;
    for (const auto& f : p.folds)
      for (std::size_t k = 0; k < f.scored.size(); ++k)
        preds += f.window_ids[k] + "," + std::to_string(f.test_seizure) + "," +
                 std::string(eeg::to_string(f.scored[k].truth)) + "," + std::string(eeg::to_string(f.scored[k].predicted)) +
                 "," + std::string(eeg::to_string(f.float_predictions[k])) + "\n";
  }
  c.write("report.txt", report);
  c.write("predictions.csv", preds);
  c.log << report;
}

void cmd_cost(const Context& c) {
  const std::string path = c.s.at("catalog");
  if (!fs::exists(path)) throw DataError("catalog not found: " + path);
  auto catalog = cost::load_catalog(path);
  cost::ScaleRequest req;
  const auto channels = c.integer("channels");
  if (channels < 1) throw UsageError("--channels must be positive");
  req.channels = req.rows = req.cols = static_cast<std::size_t>(channels);
  req.window_seconds = c.num("window_s");
  req.slot_width = c.num("slot_ns") * 1e-9;
  if (!(req.window_seconds > 0) || !(req.slot_width > 0)) throw UsageError("window and slot width must be positive");
  catalog = cost::scale(catalog, req);
  const auto result = cost::pipeline_cost(catalog);
  std::string report = c.header();
  for (const auto& note : catalog.notes) report += "# scaled: " + note + "\n";
  report += cost::report_text(result);
  c.write("cost_report.txt", report);
  c.write("cost_records.csv", cost::report_records(result, c.hash));
  c.write("catalog_used.csv", cost::catalog_to_text(catalog));
  c.log << report;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"RRAM computing-in-memory EEG correlation extraction and seizure prediction"};
  app.require_subcommand(1, 1);
  Settings flags;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file");
  for (const auto& k : keys()) {
    std::string flag = k.name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    options[k.name] = app.add_option("--" + flag, values[k.name], k.help + " (default: " +
                                                                      (k.default_value.empty() ? "none" : k.default_value) + ")");
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"characterize", "device I-V, pulse-train and overlap tables"},
      {"encode", "label windows and encode them into pulse trains"},
      {"extract", "correlation maps per window"},
      {"train", "leave-one-seizure-out training, weights per fold"},
      {"evaluate", "leave-one-seizure-out evaluation and metrics"},
      {"cost", "area/power/latency/energy report"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Settings file;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config file " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      file = parse_config(buf.str());
    }
    for (const auto& [name, opt] : options)
      if (opt->count() > 0) flags[name] = values[name];
    Context ctx{layer(file, flags), {}, {}, out};
    ctx.hash = config_hash(ctx.s);
    ctx.out = ctx.s.at("out");
    if (ctx.out.empty()) throw UsageError("--out must not be empty");

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "characterize") cmd_characterize(ctx);
    else if (cmd == "encode") cmd_encode(ctx);
    else if (cmd == "extract") cmd_extract(ctx);
    else if (cmd == "train") cmd_train(ctx);
    else if (cmd == "evaluate") cmd_evaluate(ctx);
    else cmd_cost(ctx);
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace rramcim::cli
