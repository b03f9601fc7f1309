#include "rramcim/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace rramcim::waveform {

void EncodingConfig::validate() const {
  if (!(v_pth > v_nth)) throw InvalidArgument("encoding needs v_pth > v_nth");
  if (!(pulse_amplitude > 0.0)) throw InvalidArgument("pulse amplitude must be positive");
  if (!(slot_width > 0.0)) throw InvalidArgument("slot width must be positive");
}

std::size_t PulseTrain::count() const {
  return static_cast<std::size_t>(std::count(slots.begin(), slots.end(), std::uint8_t{1}));
}

EncodedChannel encode_channel(std::span<const double> samples, const EncodingConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw InvalidArgument("cannot encode an empty channel");
  EncodedChannel out;
  out.positive = {std::vector<std::uint8_t>(samples.size()), cfg.pulse_amplitude, cfg.slot_width,
                  Polarity::positive};
  out.negative = {std::vector<std::uint8_t>(samples.size()), cfg.pulse_amplitude, cfg.slot_width,
                  Polarity::negative};
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out.positive.slots[k] = samples[k] > cfg.v_pth ? 1 : 0;
    out.negative.slots[k] = samples[k] < cfg.v_nth ? 1 : 0;
  }
  return out;
}

std::vector<EncodedChannel> encode_window(const MultiChannel& samples,
                                          std::span<const EncodingConfig> cfgs) {
  if (samples.empty()) throw InvalidArgument("cannot encode a window with no channels");
  if (cfgs.size() != 1 && cfgs.size() != samples.size())
    throw InvalidArgument("need one encoding config per channel");
  std::vector<EncodedChannel> out;
  out.reserve(samples.size());
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c].size() != samples[0].size())
      throw InvalidArgument("channels in a window must have equal length");
    out.push_back(encode_channel(samples[c], cfgs[cfgs.size() == 1 ? 0 : c]));
  }
  return out;
}

std::vector<EncodingConfig> calibrate_thresholds(std::span<const MultiChannel> windows,
                                                 double k_sigma, const EncodingConfig& base) {
  if (windows.empty()) throw InvalidArgument("no calibration data");
  const std::size_t channels = windows[0].size();
  std::vector<EncodingConfig> out;
  out.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    // Welford over every sample of this channel.
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (const auto& window : windows) {
      if (window.size() != channels) throw InvalidArgument("calibration windows differ in channel count");
      for (double x : window[c]) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
      }
    }
    if (n < 2) throw InvalidArgument("no calibration data");
    const double sigma = std::sqrt(m2 / static_cast<double>(n - 1));
    if (!(sigma > 0.0)) throw InvalidArgument("zero variance channel " + std::to_string(c));
    EncodingConfig cfg = base;
    cfg.v_pth = mean + k_sigma * sigma;
    cfg.v_nth = mean - k_sigma * sigma;
    out.push_back(cfg);
  }
  return out;
}

std::size_t extraction_slots(std::size_t samples_per_window) { return 2 * samples_per_window; }

double extraction_latency(std::size_t samples_per_window, double slot_width) {
  return static_cast<double>(extraction_slots(samples_per_window)) * slot_width;
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  if (offset + sizeof(T) > bytes.size()) throw DataError("pulse train: unexpected end of data");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

constexpr char kMagic[4] = {'R', 'P', 'T', '1'};

}  // namespace

std::vector<std::uint8_t> to_binary(const PulseTrain& train) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(train.polarity));
  put<double>(out, train.amplitude);
  put<double>(out, train.slot_width);
  put<std::uint64_t>(out, train.slots.size());
  std::vector<std::uint8_t> packed((train.slots.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < train.slots.size(); ++k)
    if (train.slots[k]) packed[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

PulseTrain from_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("pulse train: bad magic");
  std::size_t offset = 4;
  PulseTrain train;
  const auto polarity = get<std::uint8_t>(bytes, offset);
  if (polarity > 1) throw DataError("pulse train: bad polarity tag");
  train.polarity = static_cast<Polarity>(polarity);
  train.amplitude = get<double>(bytes, offset);
  train.slot_width = get<double>(bytes, offset);
  const auto count = get<std::uint64_t>(bytes, offset);
  if (bytes.size() - offset != (count + 7) / 8) throw DataError("pulse train: unexpected end of data");
  train.slots.resize(count);
  for (std::size_t k = 0; k < count; ++k) train.slots[k] = (bytes[offset + k / 8] >> (k % 8)) & 1u;
  return train;
}

std::string to_text(const PulseTrain& train) {
  std::string out = train.polarity == Polarity::positive ? "+ " : "- ";
  out += format_double(train.amplitude) + "V " + format_double(train.slot_width) + "s |";
  for (auto bit : train.slots) out.push_back(bit ? '1' : '0');
  return out;
}

}  // namespace rramcim::waveform
