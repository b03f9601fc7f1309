#include <doctest.h>

#include <cmath>
#include <random>

#include "rramcim/crossbar.hpp"

using namespace rramcim;
using namespace rramcim::crossbar;
using device::DeviceParams;
using waveform::PulseTrain;

namespace {

PulseTrain train(std::vector<std::uint8_t> bits, waveform::Polarity pol = waveform::Polarity::positive) {
  PulseTrain t;
  t.slots = std::move(bits);
  t.polarity = pol;
  return t;
}

std::vector<PulseTrain> random_trains(std::size_t channels, std::size_t slots, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution fire(p);
  std::vector<PulseTrain> out;
  for (std::size_t c = 0; c < channels; ++c) {
    PulseTrain t;
    t.slots.resize(slots);
    for (auto& s : t.slots) s = fire(rng);
    out.push_back(t);
  }
  return out;
}

// Brute-force oracle for the unclamped state after both passes.
double oracle_w(const std::vector<PulseTrain>& pos, const std::vector<PulseTrain>& neg, std::size_t i, std::size_t j,
                const DeviceParams& p) {
  long double coinc = 0, single = 0;
  for (const auto* set : {&pos, &neg}) {
    const auto& a = (*set)[i].slots;
    const auto& b = (*set)[j].slots;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] && b[k]) coinc += 1;
      else if (a[k] || b[k]) single += 1;
    }
  }
  const long double tau = pos[0].slot_width;
  const long double amp = pos[0].amplitude;
  return static_cast<double>(coinc * p.lambda * std::sinh(p.eta * 2 * amp) * tau +
                             single * p.lambda * std::sinh(p.eta * amp) * tau);
}

CrossbarArray random_array(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CrossbarArray a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a.at(i, j).w = u(rng);
  return a;
}

Matrix random_unit(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

}  // namespace

TEST_CASE("single-slot drift for coincident and single pulses") {
  const DeviceParams p;
  CrossbarArray a(2, 2);
  std::vector<PulseTrain> pos{train({1}), train({1})};
  std::vector<PulseTrain> neg{train({0}), train({0})};
  const auto both = extract(a, pos, neg);
  CHECK(std::abs(both.at(0, 1).w - 1.329e-5) / 1.329e-5 < 1e-3);
  CHECK(std::abs(both.at(0, 1).w - 0.045 * std::sinh(9.6) * 4e-8) < 1e-18);
  pos = {train({1}), train({0})};
  const auto one = extract(a, pos, neg);
  CHECK(std::abs(one.at(0, 1).w - 1.094e-7) / 1.094e-7 < 1e-3);
  CHECK(one.at(1, 0).w == doctest::Approx(one.at(0, 1).w).epsilon(1e-15));
  CHECK(one.at(1, 1).w == 0.0);
  CHECK(both.at(0, 1).w / one.at(0, 1).w == doctest::Approx(121.5).epsilon(1e-3));
}

TEST_CASE("no pulses leaves the array unchanged") {
  CrossbarArray a(18, 18);
  a.reset(0.25);
  std::vector<PulseTrain> silent(18, train(std::vector<std::uint8_t>(768, 0)));
  CHECK(extract(a, silent, silent) == a);
}

TEST_CASE("extraction equals the coincidence closed form") {
  const DeviceParams p;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pos = random_trains(18, 768, 0.16, rng);
    const auto neg = random_trains(18, 768, 0.16, rng);
    const auto out = extract(CrossbarArray(18, 18), pos, neg);
    for (std::size_t i = 0; i < 18; ++i)
      for (std::size_t j = 0; j < 18; ++j) {
        const double expect = oracle_w(pos, neg, i, j, p);
        CHECK(std::abs(out.at(i, j).w - expect) <= 1e-12 * expect);
      }
  }
}

TEST_CASE("pass order does not matter away from the clamp") {
  std::mt19937_64 rng(3);
  const auto pos = random_trains(6, 300, 0.3, rng);
  const auto neg = random_trains(6, 300, 0.3, rng);
  const auto a = extract(CrossbarArray(6, 6), pos, neg);
  const auto b = extract(CrossbarArray(6, 6), neg, pos);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(a.at(i, j).w == doctest::Approx(b.at(i, j).w).epsilon(1e-12));
}

TEST_CASE("read_map of a fresh array is uniform at G(0)") {
  const auto map = read_map(CrossbarArray(18, 18));
  for (double g : map.values.data()) CHECK(std::abs(g - 1.5564e-6) / 1.5564e-6 < 1e-4);
}

TEST_CASE("extracted maps are symmetric") {
  std::mt19937_64 rng(23);
  auto pos = random_trains(18, 768, 0.2, rng);
  auto neg = random_trains(18, 768, 0.2, rng);
  pos[4] = pos[9];
  neg[4] = neg[9];
  const auto map = read_map(extract(CrossbarArray(18, 18), pos, neg));
  CHECK(map.max_asymmetry() <= 1e-12);
  CHECK(map.values(4, 9) == map.values(9, 4));
  CHECK(map.values(4, 9) == doctest::Approx(map.values(4, 4)).epsilon(1e-12));
}

TEST_CASE("extract rejects bad inputs") {
  std::vector<PulseTrain> two(2, train({1, 0}));
  std::vector<PulseTrain> three(3, train({1, 0}));
  CHECK_THROWS_AS(extract(CrossbarArray(2, 2), three, three), InvalidArgument);
  std::vector<PulseTrain> ragged{train({1, 0}), train({1})};
  CHECK_THROWS_AS(extract(CrossbarArray(2, 2), ragged, ragged), InvalidArgument);
  CrossbarArray off(2, 2);
  off.set_wl(1, false);
  CHECK_THROWS_AS(extract(off, two, two), InvalidArgument);
  ExtractOptions noisy;
  noisy.variability.sigma_dw = 0.1;
  CHECK_THROWS_AS(extract(CrossbarArray(2, 2), two, two, noisy), InvalidArgument);
}

TEST_CASE("probe trace records both passes") {
  std::vector<PulseTrain> pos{train({1, 1, 0}), train({1, 0, 0})};
  std::vector<PulseTrain> neg{train({0, 0, 1}), train({0, 0, 1})};
  std::vector<double> trace;
  ExtractOptions opt;
  opt.probe_trace = &trace;
  opt.probe_row = 0;
  opt.probe_col = 1;
  const auto out = extract(CrossbarArray(2, 2), pos, neg, opt);
  REQUIRE(trace.size() == 6);
  CHECK(trace[2] == trace[1]);
  CHECK(trace[5] > trace[4]);
  CHECK(trace.back() == out.at(0, 1).w);
}

TEST_CASE("array_from_map reproduces the map") {
  std::mt19937_64 rng(31);
  const auto a = random_array(5, 5, rng);
  const auto map = read_map(a);
  const auto b = array_from_map(map, a.params());
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(a.at(i, j).w - b.at(i, j).w) < 1e-12);
}

TEST_CASE("quantizer arithmetic") {
  CHECK(quantize_unit(0.5, 8) == 128);
  CHECK(128.0 / 255.0 == doctest::Approx(0.50196).epsilon(1e-5));
  CHECK(quantize_unit(0.0, 8) == 0);
  CHECK(quantize_unit(1.0, 8) == 255);
  CHECK(quantize_unit(1.0, 16) == 65535);
  CHECK_THROWS_AS(quantize_unit(1.01, 8), InvalidArgument);
  CHECK_THROWS_AS(quantize_unit(-0.01, 8), InvalidArgument);
}

TEST_CASE("digitize rounds and saturates") {
  AdcConfig adc;
  adc.full_scale = 255e-6;
  CHECK(digitize(0.0, adc).code == 0);
  CHECK(digitize(-1.0, adc).code == 0);
  CHECK(digitize(10.4e-6, adc).code == 10);
  CHECK(digitize(10.6e-6, adc).code == 11);
  const auto sat = digitize(300e-6, adc);
  CHECK(sat.code == 255);
  CHECK(sat.clipped);
  CHECK_FALSE(digitize(255e-6, adc).clipped);
  adc.column_full_scale = {255e-6, 25.5e-6};
  CHECK(digitize(10e-6, adc, 0).code == 10);
  CHECK(digitize(10e-6, adc, 1).code == 100);
  adc.column_full_scale = {1.0, 0.0};
  CHECK_THROWS_AS(adc.validate(), InvalidArgument);
}

TEST_CASE("first layer: all-ones and all-zeros weights") {
  std::mt19937_64 rng(1);
  const auto array = random_array(18, 18, rng);
  AdcConfig adc;
  adc.full_scale = worst_case_full_scale(18, array.params());
  const auto ones = quantize_weights(Matrix(18, 18, 1.0));
  const auto out = first_layer_compute(array, ones, adc);
  for (std::size_t j = 0; j < 18; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 18; ++i) sum += device::current(array.at(i, j), array.params(), kComputeVoltage);
    const double quantized = digitize(sum, adc).code * adc.lsb();
    CHECK(out.values[j] == doctest::Approx(quantized).epsilon(1e-12));
  }
  const auto zeros = first_layer_compute(array, quantize_weights(Matrix(18, 18, 0.0)), adc);
  for (double h : zeros.values) CHECK(h == 0.0);
  CHECK(out.clipped == 0);
}

TEST_CASE("first layer matches the float weighted sum within half an LSB") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto array = random_array(18, 18, rng);
    const auto w = quantize_weights(random_unit(18, 18, rng));
    AdcConfig adc;
    adc.full_scale = worst_case_full_scale(18, array.params());
    std::vector<PlaneRecord> trace;
    ComputeOptions opt;
    opt.trace = &trace;
    const auto out = first_layer_compute(array, w, adc, opt);
    CHECK(trace.size() == 18 * 8);
    for (std::size_t j = 0; j < 18; ++j) {
      double exact = 0.0;
      for (std::size_t i = 0; i < 18; ++i)
        exact += w.value(i, j) * device::current(array.at(i, j), array.params(), kComputeVoltage);
      CHECK(std::abs(out.values[j] - exact) <= 0.5 * adc.lsb() * (1 + 1e-9));
    }
  }
}

TEST_CASE("16-bit compute converges to the float weighted sum") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto array = random_array(18, 18, rng);
    const auto wf = random_unit(18, 18, rng);
    AdcConfig adc;
    adc.bits = 16;
    adc.full_scale = worst_case_full_scale(18, array.params());
    const auto out = first_layer_compute(array, quantize_weights(wf, 16), adc);
    for (std::size_t j = 0; j < 18; ++j) {
      double exact = 0.0;
      for (std::size_t i = 0; i < 18; ++i)
        exact += wf(i, j) * device::current(array.at(i, j), array.params(), kComputeVoltage);
      CHECK(std::abs(out.values[j] - exact) <= 1e-4 * exact);
    }
  }
}

TEST_CASE("per-column references shrink the error bound of small columns") {
  std::mt19937_64 rng(8);
  CrossbarArray array(18, 2);
  for (std::size_t i = 0; i < 18; ++i) array.at(i, 1).w = 1.0;
  AdcConfig shared;
  shared.full_scale = worst_case_full_scale(18, array.params());
  AdcConfig per = shared;
  per.column_full_scale = {programmed_full_scale(array) * 0.1, shared.full_scale};
  std::vector<std::uint32_t> x(18);
  std::uniform_int_distribution<std::uint32_t> code(0, 255);
  for (auto& v : x) v = code(rng);
  const auto a = second_layer_compute(array, x, 8, shared);
  const auto b = second_layer_compute(array, x, 8, per);
  double exact0 = 0.0;
  for (std::size_t i = 0; i < 18; ++i) exact0 += x[i] / 255.0 * device::current({0.0}, array.params(), 1.0);
  CHECK(std::abs(b.values[0] - exact0) <= 0.5 * per.lsb(0) * (1 + 1e-9));
  CHECK(std::abs(a.values[0] - exact0) <= 0.5 * shared.lsb() * (1 + 1e-9));
  CHECK(a.values[1] == b.values[1]);
  per.column_full_scale = {1.0};
  CHECK_THROWS_AS(second_layer_compute(array, x, 8, per), InvalidArgument);
}

TEST_CASE("second layer") {
  std::mt19937_64 rng(6);
  const auto array = random_array(18, 2, rng);
  AdcConfig adc;
  adc.full_scale = worst_case_full_scale(18, array.params());
  const std::vector<std::uint32_t> zero(18, 0);
  const auto z = second_layer_compute(array, zero, 8, adc);
  CHECK(z.values[0] == z.values[1]);

  std::vector<std::uint32_t> onehot(18, 0);
  onehot[5] = 255;
  const auto oh = second_layer_compute(array, onehot, 8, adc);
  for (std::size_t c = 0; c < 2; ++c)
    CHECK(std::abs(oh.values[c] - device::current(array.at(5, c), array.params(), 1.0)) <= 0.5 * adc.lsb());

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint32_t> x(18);
    std::uniform_int_distribution<std::uint32_t> code(0, 255);
    for (auto& v : x) v = code(rng);
    const auto out = second_layer_compute(array, x, 8, adc);
    for (std::size_t c = 0; c < 2; ++c) {
      double exact = 0.0;
      for (std::size_t i = 0; i < 18; ++i) exact += x[i] / 255.0 * device::current(array.at(i, c), array.params(), 1.0);
      CHECK(std::abs(out.values[c] - exact) <= 0.5 * adc.lsb() * (1 + 1e-9));
    }
  }
  std::vector<std::uint32_t> big(18, 256);
  CHECK_THROWS_AS(second_layer_compute(array, big, 8, adc), InvalidArgument);
  CHECK_THROWS_AS(second_layer_compute(array, std::vector<std::uint32_t>(3, 0), 8, adc), InvalidArgument);
}

TEST_CASE("common scaling of the ADC reference keeps the argmax") {
  std::mt19937_64 rng(12);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto array = random_array(18, 2, rng);
    std::vector<std::uint32_t> x(18);
    std::uniform_int_distribution<std::uint32_t> code(0, 255);
    for (auto& v : x) v = code(rng);
    AdcConfig adc;
    adc.bits = 16;
    adc.full_scale = worst_case_full_scale(18, array.params());
    const auto a = second_layer_compute(array, x, 8, adc);
    adc.full_scale *= 3.0;
    const auto b = second_layer_compute(array, x, 8, adc);
    // a flip is only possible when the columns sit within an LSB of each other
    if (std::abs(a.values[0] - a.values[1]) > 2 * adc.lsb()) {
      ++total;
      agree += (a.values[0] < a.values[1]) == (b.values[0] < b.values[1]);
    }
  }
  CHECK(total > 40);
  CHECK(agree == total);
}

TEST_CASE("ADC clipping is counted") {
  CrossbarArray array(4, 1);
  array.reset(1.0);
  AdcConfig adc;
  adc.full_scale = device::current({1.0}, array.params(), 1.0);
  const auto out = first_layer_compute(array, quantize_weights(Matrix(4, 1, 1.0)), adc);
  CHECK(out.clipped == 8);
  CHECK(out.accum[0] == 255u * 255u);
}

TEST_CASE("relu") {
  CHECK(relu(-3.0) == 0.0);
  CHECK(relu(0.0) == 0.0);
  CHECK(relu(2.5) == 2.5);
  const std::vector<double> xs{-1.0, 4.0};
  CHECK(relu(xs) == std::vector<double>{0.0, 4.0});
}
