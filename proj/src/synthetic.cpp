#include <cmath>

#include "rramcim/eegdata.hpp"

namespace rramcim::eeg {

namespace {

class Ar1 {
public:
  Ar1(double phi, Rng& rng) : phi_(phi), innovation_(std::sqrt(1.0 - phi * phi)), rng_(rng) {
    value_ = normal_(rng_);
  }
  double next() {
    const double out = value_;
    value_ = phi_ * value_ + innovation_ * normal_(rng_);
    return out;
  }

private:
  double phi_;
  double innovation_;
  Rng& rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double value_ = 0.0;
};

}  // namespace

Recording synthesize(const SyntheticProfile& profile, std::uint64_t seed) {
  if (profile.channels == 0) throw InvalidArgument("synthesize: need at least one channel");
  if (!(profile.sampling_rate > 0.0) || !(profile.duration > 0.0))
    throw InvalidArgument("synthesize: sampling rate and duration must be positive");
  if (!(profile.ar_coefficient >= 0.0 && profile.ar_coefficient < 1.0))
    throw InvalidArgument("synthesize: AR coefficient must be in [0, 1)");
  auto check_rho = [](double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("synthesize: rho must be in [0, 1]");
  };
  check_rho(profile.rho);
  for (const auto& r : profile.regimes) check_rho(r.rho);

  Recording rec;
  rec.patient_id = profile.patient_id;
  rec.file_id = profile.file_id;
  rec.sampling_rate = profile.sampling_rate;
  rec.start_time = profile.start_time;
  rec.seizures = profile.seizures;
  for (std::size_t c = 0; c < profile.channels; ++c)
    rec.labels.emplace_back(c < kChannels.size() ? std::string(kChannels[c]) : "CH" + std::to_string(c + 1));

  const auto n = static_cast<std::size_t>(std::llround(profile.duration * profile.sampling_rate));
  rec.samples.assign(profile.channels, std::vector<double>(n));

  Rng shared_rng = substream(seed, "synthetic/shared/" + profile.file_id);
  Ar1 shared(profile.ar_coefficient, shared_rng);
  std::vector<Rng> private_rngs;
  private_rngs.reserve(profile.channels);
  for (std::size_t c = 0; c < profile.channels; ++c)
    private_rngs.push_back(substream(seed, "synthetic/private/" + profile.file_id + "/" + std::to_string(c)));
  std::vector<Ar1> sources;
  sources.reserve(profile.channels);
  for (auto& r : private_rngs) sources.emplace_back(profile.ar_coefficient, r);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / profile.sampling_rate;
    double rho = profile.rho;
    for (const auto& r : profile.regimes)
      if (t >= r.start && t < r.end) rho = r.rho;
    const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
    const double s = shared.next();
    for (std::size_t c = 0; c < profile.channels; ++c)
      rec.samples[c][k] = profile.amplitude_uv * (a * s + b * sources[c].next());
  }
  return rec;
}

}  // namespace rramcim::eeg
