#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rramcim/eegdata.hpp"

namespace rramcim::eeg {

namespace {

constexpr std::size_t kFixedHeader = 256;
constexpr std::size_t kPerSignalHeader = 256;

class HeaderReader {
public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string field(std::size_t offset, std::size_t width) const {
    if (offset + width > bytes_.size()) throw DataError("EDF: unexpected end of data in header");
    return trim(std::string_view(reinterpret_cast<const char*>(bytes_.data() + offset), width));
  }
  double number(std::size_t offset, std::size_t width, std::string_view what) const {
    return parse_double(field(offset, width), std::string("EDF: malformed header field '") +
                                                  std::string(what) + "'");
  }
  long long integer(std::size_t offset, std::size_t width, std::string_view what) const {
    return parse_int(field(offset, width), std::string("EDF: malformed header field '") +
                                               std::string(what) + "'");
  }

private:
  std::span<const std::uint8_t> bytes_;
};

double microvolt_factor(const std::string& dimension) {
  std::string d;
  for (char c : dimension) d.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (d == "uv" || d == "\xc2\xb5v" || d == "\xce\xbcv") return 1.0;
  if (d == "mv") return 1e3;
  if (d == "v") return 1e6;
  if (d == "nv") return 1e-3;
  throw DataError("EDF: unsupported physical dimension '" + dimension + "'");
}

struct SignalHeader {
  std::string label;
  std::string dimension;
  double physical_min, physical_max;
  double digital_min, digital_max;
  long long samples_per_record;
  bool annotation;
};

}  // namespace

Recording parse_edf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedHeader) throw DataError("EDF: unexpected end of data in header");
  const HeaderReader h(bytes);
  if (h.field(0, 8) != "0") throw DataError("EDF: unsupported version field '" + h.field(0, 8) + "'");
  const auto header_bytes = h.integer(184, 8, "header bytes");
  const std::string reserved = h.field(192, 44);
  if (reserved.rfind("EDF+D", 0) == 0) throw DataError("EDF: discontinuous EDF+ files are not supported");
  if (reserved.rfind("BDF", 0) == 0) throw DataError("EDF: 24-bit BDF files are not supported");
  const auto n_records = h.integer(236, 8, "number of data records");
  const double record_seconds = h.number(244, 8, "record duration");
  const auto ns_ll = h.integer(252, 4, "number of signals");
  if (ns_ll <= 0) throw DataError("EDF: malformed header, no signals");
  const auto ns = static_cast<std::size_t>(ns_ll);
  if (header_bytes != static_cast<long long>(kFixedHeader + kPerSignalHeader * ns))
    throw DataError("EDF: malformed header, header size does not match signal count");
  if (bytes.size() < kFixedHeader + kPerSignalHeader * ns)
    throw DataError("EDF: unexpected end of data in header");
  if (!(record_seconds > 0.0)) throw DataError("EDF: malformed header, record duration must be positive");

  std::vector<SignalHeader> signals(ns);
  std::size_t base = kFixedHeader;
  auto column = [&](std::size_t width) {
    const std::size_t start = base;
    base += width * ns;
    return start;
  };
  const auto labels_at = column(16);
  column(80);  // transducer
  const auto dim_at = column(8);
  const auto pmin_at = column(8);
  const auto pmax_at = column(8);
  const auto dmin_at = column(8);
  const auto dmax_at = column(8);
  column(80);  // prefilter
  const auto spr_at = column(8);

  std::size_t record_samples = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    auto& sig = signals[s];
    sig.label = h.field(labels_at + 16 * s, 16);
    sig.dimension = h.field(dim_at + 8 * s, 8);
    sig.physical_min = h.number(pmin_at + 8 * s, 8, "physical minimum");
    sig.physical_max = h.number(pmax_at + 8 * s, 8, "physical maximum");
    sig.digital_min = static_cast<double>(h.integer(dmin_at + 8 * s, 8, "digital minimum"));
    sig.digital_max = static_cast<double>(h.integer(dmax_at + 8 * s, 8, "digital maximum"));
    sig.samples_per_record = h.integer(spr_at + 8 * s, 8, "samples per record");
    sig.annotation = sig.label == "EDF Annotations";
    if (sig.samples_per_record <= 0) throw DataError("EDF: malformed header, samples per record must be positive");
    if (sig.digital_max <= sig.digital_min)
      throw DataError("EDF: malformed header, digital range of '" + sig.label + "' is empty");
    record_samples += static_cast<std::size_t>(sig.samples_per_record);
  }

  const std::size_t record_bytes = 2 * record_samples;
  const std::size_t data_bytes = bytes.size() - static_cast<std::size_t>(header_bytes);
  std::size_t records = 0;
  if (n_records == -1) {
    if (data_bytes % record_bytes != 0) throw DataError("EDF: inconsistent record sizes");
    records = data_bytes / record_bytes;
  } else if (n_records < 0) {
    throw DataError("EDF: malformed header, negative record count");
  } else {
    records = static_cast<std::size_t>(n_records);
    if (data_bytes < records * record_bytes) throw DataError("EDF: unexpected end of data");
    if (data_bytes > records * record_bytes) throw DataError("EDF: inconsistent record sizes");
  }

  Recording rec;
  std::optional<double> rate;
  std::vector<std::size_t> kept;
  for (std::size_t s = 0; s < ns; ++s) {
    if (signals[s].annotation) continue;
    const double r = static_cast<double>(signals[s].samples_per_record) / record_seconds;
    if (rate && *rate != r)
      throw DataError("EDF: unsupported variant, signals use different sampling rates");
    rate = r;
    microvolt_factor(signals[s].dimension);
    kept.push_back(s);
    rec.labels.push_back(signals[s].label);
  }
  if (!rate) throw DataError("EDF: no data signals");
  rec.sampling_rate = *rate;
  rec.samples.assign(kept.size(), {});
  for (std::size_t k = 0; k < kept.size(); ++k)
    rec.samples[k].reserve(records * static_cast<std::size_t>(signals[kept[k]].samples_per_record));

  const std::uint8_t* data = bytes.data() + header_bytes;
  for (std::size_t r = 0; r < records; ++r) {
    std::size_t k = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& sig = signals[s];
      const auto n = static_cast<std::size_t>(sig.samples_per_record);
      if (sig.annotation) {
        data += 2 * n;
        continue;
      }
      const double gain = (sig.physical_max - sig.physical_min) / (sig.digital_max - sig.digital_min);
      const double factor = microvolt_factor(sig.dimension);
      auto& out = rec.samples[k++];
      for (std::size_t i = 0; i < n; ++i) {
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(data[0]) |
                                                   (static_cast<std::uint16_t>(data[1]) << 8));
        data += 2;
        out.push_back(((raw - sig.digital_min) * gain + sig.physical_min) * factor);
      }
    }
  }
  return rec;
}

Recording read_edf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open EDF file: " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    auto rec = parse_edf(bytes);
    auto name = path.substr(path.find_last_of('/') + 1);
    rec.file_id = name.substr(0, name.find_last_of('.'));
    return rec;
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace {

void put_field(std::vector<std::uint8_t>& out, const std::string& text, std::size_t width) {
  if (text.size() > width) throw InvalidArgument("EDF field '" + text + "' wider than " + std::to_string(width));
  std::string padded = text;
  padded.resize(width, ' ');
  out.insert(out.end(), padded.begin(), padded.end());
}

std::string fit_number(double value, std::size_t width) {
  char buf[32];
  for (int precision = 8; precision >= 1; --precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strlen(buf) <= width) return buf;
  }
  throw InvalidArgument("number does not fit EDF field");
}

}  // namespace

std::vector<std::uint8_t> write_edf(std::span<const EdfSignalSpec> signals,
                                    const std::vector<std::vector<std::int16_t>>& digital,
                                    int samples_per_record, double record_seconds) {
  if (signals.empty() || digital.size() != signals.size())
    throw InvalidArgument("write_edf: one sample vector per signal required");
  if (samples_per_record <= 0) throw InvalidArgument("write_edf: samples per record must be positive");
  const std::size_t total = digital[0].size();
  for (const auto& d : digital)
    if (d.size() != total) throw InvalidArgument("write_edf: signals differ in length");
  if (total % static_cast<std::size_t>(samples_per_record) != 0)
    throw InvalidArgument("write_edf: sample count is not a whole number of records");
  const std::size_t records = total / static_cast<std::size_t>(samples_per_record);
  const std::size_t ns = signals.size();

  std::vector<std::uint8_t> out;
  put_field(out, "0", 8);
  put_field(out, "X X X X", 80);
  put_field(out, "Startdate X X X X", 80);
  put_field(out, "01.01.00", 8);
  put_field(out, "00.00.00", 8);
  put_field(out, std::to_string(kFixedHeader + kPerSignalHeader * ns), 8);
  put_field(out, "", 44);
  put_field(out, std::to_string(records), 8);
  put_field(out, fit_number(record_seconds, 8), 8);
  put_field(out, std::to_string(ns), 4);
  for (const auto& s : signals) put_field(out, s.label, 16);
  for (std::size_t s = 0; s < ns; ++s) put_field(out, "", 80);
  for (const auto& s : signals) put_field(out, s.physical_dimension, 8);
  for (const auto& s : signals) put_field(out, fit_number(s.physical_min, 8), 8);
  for (const auto& s : signals) put_field(out, fit_number(s.physical_max, 8), 8);
  for (const auto& s : signals) put_field(out, std::to_string(s.digital_min), 8);
  for (const auto& s : signals) put_field(out, std::to_string(s.digital_max), 8);
  for (std::size_t s = 0; s < ns; ++s) put_field(out, "", 80);
  for (std::size_t s = 0; s < ns; ++s) put_field(out, std::to_string(samples_per_record), 8);
  for (std::size_t s = 0; s < ns; ++s) put_field(out, "", 32);

  for (std::size_t r = 0; r < records; ++r)
    for (std::size_t s = 0; s < ns; ++s)
      for (int i = 0; i < samples_per_record; ++i) {
        const auto v = static_cast<std::uint16_t>(digital[s][r * static_cast<std::size_t>(samples_per_record) + static_cast<std::size_t>(i)]);
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
      }
  return out;
}

}  // namespace rramcim::eeg
