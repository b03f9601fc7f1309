#include <doctest.h>

#include <cmath>
#include <random>

#include "rramcim/predictor.hpp"

using namespace rramcim;
using namespace rramcim::predictor;
using device::DeviceParams;

namespace {

// Map read from an array whose devices sit at w ~ U[lo, hi] off the
// diagonal and U[dlo, dhi] on it.
Matrix map_from_states(double lo, double hi, std::mt19937_64& rng, double dlo = 0.1, double dhi = 0.2) {
  std::uniform_real_distribution<double> off(lo, hi), diag(dlo, dhi);
  crossbar::CrossbarArray a(18, 18);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t j = i; j < 18; ++j) {
      const double w = i == j ? diag(rng) : off(rng);
      a.at(i, j).w = w;
      a.at(j, i).w = w;
    }
  return crossbar::read_map(a).values;
}

std::vector<Example> separable_set(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  for (std::size_t k = 0; k < per_class; ++k) {
    out.push_back({map_from_states(0.0, 0.04, rng), Label::interictal});
    out.push_back({map_from_states(0.06, 0.12, rng), Label::preictal});
  }
  return out;
}

TrainConfig quick() {
  TrainConfig c;
  c.steps = 800;
  c.batch_size = 32;
  return c;
}

ScoredWindow win(double start, Label truth, Label pred, int seizure = -1, double onset = 0.0) {
  return {start, truth, pred, seizure, onset};
}

}  // namespace

TEST_CASE("feature matrix is the current ratio at the compute voltage") {
  const DeviceParams p;
  std::mt19937_64 rng(1);
  const auto map = map_from_states(0.0, 1.0, rng, 0.0, 1.0);
  const auto x = feature_matrix(map, p);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t j = 0; j < 18; ++j) {
      // independent inversion: G is affine in w at fixed V
      const double g0 = device::conductance({0.0}, p), g1 = device::conductance({1.0}, p);
      const double w = (map(i, j) - g0) / (g1 - g0);
      const double i0 = 9e-7 * (1 - std::exp(-4.0));
      const double expect = ((1 - w) * i0 + w * 2.8e-7 * std::sinh(6.0)) / i0;
      CHECK(x(i, j) == doctest::Approx(expect).epsilon(1e-10));
    }
  const Matrix g0(2, 2, device::conductance({0.0}, p));
  const auto ones = feature_matrix(g0, p);
  for (double v : ones.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("forward model against a hand evaluation") {
  const DeviceParams p;
  NetworkWeights w = initial_weights(3, 2);
  w.temperature = 5.0;
  Matrix x(3, 3);
  for (std::size_t k = 0; k < 9; ++k) x.data()[k] = 1.0 + 0.1 * k;
  const auto out = forward(w, x, p);
  const double i0 = device::current({0.0}, p, 1.0), i1 = device::current({1.0}, p, 1.0);
  for (std::size_t c = 0; c < 2; ++c) {
    double z = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      double h = 0.0;
      for (std::size_t i = 0; i < 3; ++i) h += w.layer1(i, j) * x(i, j);
      z += h * device::current({w.layer2(j, c)}, p, 1.0) / i1;
    }
    CHECK(out.logits[c] == doctest::Approx(5.0 * z / 9.0).epsilon(1e-12));
  }
  CHECK(i0 < i1);
}

TEST_CASE("ties go to interictal") {
  CHECK(decide(1.0, 1.0) == Label::interictal);
  CHECK(decide(1.0, 1.0 + 1e-12) == Label::preictal);
  const DeviceParams p;
  NetworkWeights w;
  w.layer1 = Matrix(18, 18, 0.5);
  w.layer2 = Matrix(18, 2, 0.5);
  const Matrix g0(18, 18, device::conductance({0.0}, p));
  CHECK(predict_float(w, g0, p) == Label::interictal);
  const auto model = deploy(w, p);
  CorrelationMap m{g0, "", ""};
  CHECK(predict_window(model, m) == Label::interictal);
}

TEST_CASE("training reaches high accuracy on separable features") {
  const DeviceParams p;
  const auto set = separable_set(60, 3);
  const auto w = train(set, p, quick(), 11);
  std::size_t correct = 0;
  for (const auto& e : set) correct += predict_float(w, e.map, p) == e.label;
  CHECK(static_cast<double>(correct) / static_cast<double>(set.size()) >= 0.99);
}

TEST_CASE("training is deterministic and order independent") {
  const DeviceParams p;
  auto set = separable_set(20, 4);
  auto cfg = quick();
  cfg.steps = 100;
  const auto a = train(set, p, cfg, 5);
  const auto b = train(set, p, cfg, 5);
  CHECK(a.layer1 == b.layer1);
  CHECK(a.layer2 == b.layer2);
  std::mt19937_64 rng(8);
  std::shuffle(set.begin(), set.end(), rng);
  const auto c = train(set, p, cfg, 5);
  CHECK(a.layer1 == c.layer1);
  CHECK(a.temperature == c.temperature);
  CHECK(train(set, p, cfg, 6).layer1 != a.layer1);
}

TEST_CASE("zero steps returns the initialization") {
  const DeviceParams p;
  auto cfg = quick();
  cfg.steps = 0;
  const auto w = train(separable_set(3, 1), p, cfg, 9);
  const auto init = initial_weights(18, 9);
  CHECK(w.layer1 == init.layer1);
  CHECK(w.layer2 == init.layer2);
}

TEST_CASE("weights stay inside [0, 1] whatever the data") {
  const DeviceParams p;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<Example> set;
    for (int k = 0; k < 10; ++k) set.push_back({map_from_states(0.0, 1.0, rng, 0.0, 1.0), k % 2 ? Label::preictal : Label::interictal});
    auto cfg = quick();
    cfg.steps = 50 + 50 * static_cast<int>(seed);
    cfg.learning_rate = 0.5;
    const auto w = train(set, p, cfg, seed);
    for (double v : w.layer1.data()) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : w.layer2.data()) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(w.temperature > 0.0);
  }
}

TEST_CASE("single-class data is rejected") {
  std::mt19937_64 rng(1);
  std::vector<Example> set{{map_from_states(0, 0.1, rng), Label::preictal}};
  CHECK_THROWS_WITH_AS(train(set, DeviceParams{}, quick(), 1), "degenerate training set", InvalidArgument);
  CHECK_THROWS_AS(train(std::vector<Example>{}, DeviceParams{}, quick(), 1), InvalidArgument);
}

TEST_CASE("deploy maps weights onto devices and codes") {
  const DeviceParams p;
  NetworkWeights w;
  w.layer1 = Matrix(18, 18, 0.5);
  w.layer2 = Matrix(18, 2, 0.0);
  w.layer2(3, 1) = 1.0;
  w.layer2(4, 0) = 0.25;
  const auto model = deploy(w, p);
  CHECK(model.layer2.at(0, 0).w == 0.0);
  CHECK(model.layer2.at(3, 1).w == 1.0);
  CHECK(model.layer2.at(4, 0).w == 0.25);
  CHECK(model.layer1.code(0, 0) == 128);
  CHECK(model.layer1.value(0, 0) == doctest::Approx(0.50196).epsilon(1e-5));
  CHECK(model.stats.layer1_max_error == doctest::Approx(128.0 / 255.0 - 0.5));
  CHECK(model.stats.layer2_max_error == 0.0);
  CHECK(model.adc1.full_scale == doctest::Approx(crossbar::worst_case_full_scale(18, p)));
  w.layer1(0, 0) = 1.5;
  CHECK_THROWS_AS(deploy(w, p), InvalidArgument);
}

TEST_CASE("deployed first layer tracks the float hidden units") {
  const DeviceParams p;
  std::mt19937_64 rng(21);
  NetworkWeights w = initial_weights(18, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w.layer1.data()) v = u(rng);
  std::vector<Matrix> calib;
  for (int k = 0; k < 10; ++k) calib.push_back(map_from_states(0.0, 0.2, rng));
  DeployOptions opt;
  opt.calibration_maps = calib;
  const auto model = deploy(w, p, opt);
  NetworkWeights wq = w;
  for (std::size_t k = 0; k < wq.layer1.size(); ++k) wq.layer1.data()[k] = model.layer1.value(k / 18, k % 18);
  const double i0 = device::current({0.0}, p, 1.0);
  for (const auto& m : calib) {
    const auto inf = infer(model, crossbar::array_from_map({m, "", ""}, p));
    const auto ref = forward(wq, feature_matrix(m, p), p);
    CHECK(inf.layer1.clipped == 0);
    for (std::size_t j = 0; j < 18; ++j)
      CHECK(std::abs(inf.layer1.values[j] - ref.hidden[j] * i0) <= 0.5 * model.adc1.lsb(j) * (1 + 1e-9));
  }
}

TEST_CASE("deployed argmax agrees with the float model") {
  const DeviceParams p;
  const auto set = separable_set(60, 7);
  const auto w = train(set, p, quick(), 2);
  DeployOptions opt;
  for (const auto& e : set) opt.calibration_maps.push_back(e.map);
  const auto model = deploy(w, p, opt);
  const auto test = separable_set(100, 8);
  std::size_t agree = 0;
  for (const auto& e : test) agree += predict_window(model, {e.map, "", ""}) == predict_float(w, e.map, p);
  CHECK(static_cast<double>(agree) / static_cast<double>(test.size()) >= 0.95);
}

TEST_CASE("a high-coincidence map is predicted preictal by a trained model") {
  const DeviceParams p;
  const auto set = separable_set(60, 9);
  const auto w = train(set, p, quick(), 4);
  DeployOptions opt;
  for (const auto& e : set) opt.calibration_maps.push_back(e.map);
  const auto model = deploy(w, p, opt);
  std::mt19937_64 rng(99);
  CHECK(predict_window(model, {map_from_states(0.09, 0.11, rng), "", ""}) == Label::preictal);
  CHECK(predict_window(model, {map_from_states(0.0, 0.01, rng), "", ""}) == Label::interictal);
}

TEST_CASE("weights text round-trip") {
  auto w = initial_weights(18, 12);
  w.temperature = 123.456;
  w.config_hash = "abc";
  const auto back = weights_from_text(weights_to_text(w));
  CHECK(back.layer1 == w.layer1);
  CHECK(back.layer2 == w.layer2);
  CHECK(back.temperature == w.temperature);
  CHECK(back.seed == 12);
  CHECK(back.bit_width == 8);
  CHECK(back.config_hash == "abc");
  CHECK_THROWS_AS(weights_from_text("# nothing\nlayer1 2 2\n0 0\n"), DataError);
}

TEST_CASE("scoring: perfect and silent classifiers") {
  std::vector<ScoredWindow> truth;
  for (int k = 0; k < 10; ++k) truth.push_back(win(1000.0 + 3 * k, Label::preictal, Label::preictal, 0, 1030.0));
  for (int k = 0; k < 1200; ++k) truth.push_back(win(50000.0 + 3 * k, Label::interictal, Label::interictal));
  const auto perfect = score("p", truth);
  CHECK(perfect.sensitivity == 100.0);
  CHECK(perfect.fpr_per_hour == 0.0);
  CHECK(perfect.interictal_hours == doctest::Approx(1.0));
  CHECK(perfect.predicted_time == doctest::Approx(0.5));
  CHECK(perfect.window_accuracy() == 1.0);
  auto silent = truth;
  for (auto& w : silent) w.predicted = Label::interictal;
  const auto s = score("p", silent);
  CHECK(s.sensitivity == 0.0);
  CHECK(s.fpr_per_hour == 0.0);
}

TEST_CASE("refractory period groups false alarms") {
  std::vector<ScoredWindow> w;
  for (int k = 0; k < 2400; ++k) w.push_back(win(3.0 * k, Label::interictal, Label::interictal));
  w[0].predicted = Label::preictal;
  w[100].predicted = Label::preictal;   // 300 s later: inside refractory
  w[600].predicted = Label::preictal;   // 1800 s later: new alarm
  w[601].predicted = Label::preictal;
  const auto m = score("p", w);
  CHECK(m.false_alarms == 2);
  CHECK(m.fpr_per_hour == doctest::Approx(1.0));
}

TEST_CASE("scoring is monotone under added hits and false alarms") {
  std::mt19937_64 rng(2);
  std::bernoulli_distribution coin(0.05);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredWindow> w;
    for (int s = 0; s < 3; ++s)
      for (int k = 0; k < 20; ++k)
        w.push_back(win(100000.0 * s + 3 * k, Label::preictal, coin(rng) ? Label::preictal : Label::interictal, s, 100000.0 * s + 60));
    for (int k = 0; k < 3000; ++k)
      w.push_back(win(500000.0 + 3 * k, Label::interictal, coin(rng) ? Label::preictal : Label::interictal));
    const auto base = score("p", w);
    auto more_hits = w;
    more_hits[static_cast<std::size_t>(rng() % 60)].predicted = Label::preictal;
    CHECK(score("p", more_hits).sensitivity >= base.sensitivity);
    auto more_alarms = w;
    more_alarms[60 + static_cast<std::size_t>(rng() % 3000)].predicted = Label::preictal;
    CHECK(score("p", more_alarms).fpr_per_hour >= base.fpr_per_hour);
  }
}

TEST_CASE("summary averages and report") {
  PatientMetrics a, b;
  a.patient_id = "chb02";
  a.sensitivity = 100;
  a.fpr_per_hour = 0.1;
  a.predicted_time = 30;
  b.patient_id = "chb01";
  b.sensitivity = 50;
  b.fpr_per_hour = 0.3;
  b.predicted_time = 20;
  const auto s = summarize({a, b});
  CHECK(s.patients[0].patient_id == "chb01");
  CHECK(s.mean_sensitivity == 75.0);
  CHECK(s.mean_fpr_per_hour == doctest::Approx(0.2));
  CHECK(s.mean_predicted_time == 25.0);
  const auto text = metrics_to_text(s, "h");
  CHECK(text.rfind("# config=h\n", 0) == 0);
  CHECK(text.find("average") != std::string::npos);
  CHECK(metrics_report(s).find("chb02") != std::string::npos);
}
