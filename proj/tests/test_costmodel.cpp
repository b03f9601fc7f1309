#include <doctest.h>

#include <cmath>

#include "rramcim/costmodel.hpp"

using namespace rramcim;
using namespace rramcim::cost;

namespace {

const Catalog& table() {
  static const Catalog c = load_catalog(default_catalog_path());
  return c;
}

const ComponentSpec& find(const Catalog& c, Phase p, const std::string& name) {
  for (const auto& comp : c.phase(p).components)
    if (comp.name == name) return comp;
  throw std::runtime_error("no component " + name);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const char* kHeader = "kind,phase,name,spec,count,area_mm2,power_mw,unit_us,total_us,table_nj,technology,core\n";

}  // namespace

TEST_CASE("extraction phase matches the reference totals") {
  const auto r = rollup(table().phase(Phase::extracting));
  CHECK(r.latency == doctest::Approx(61.44));
  CHECK(rel(r.power, 24.4) < 0.05);
  CHECK(rel(r.energy, 1.50e3) < 0.05);
  CHECK(rel(r.area, 0.82) < 0.05);
  // every component runs for the whole phase: energy = power x 61.44 us
  double sum = 0.0;
  for (const auto& c : table().phase(Phase::extracting).components) sum += c.power * 61.44;
  CHECK(r.energy == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("computing phase matches the reference totals") {
  const auto r = rollup(table().phase(Phase::computing));
  CHECK(r.latency == doctest::Approx(0.836));
  CHECK(rel(r.power, 19.0) < 0.05);
  CHECK(rel(r.energy, 15.9) < 0.05);
  CHECK(rel(r.area, 0.83) < 0.05);
  for (const auto& c : r.components) {
    if (c.name == "ReLU") CHECK(c.active_latency == doctest::Approx(0.098));
    if (c.name == "Crossbar") CHECK(c.active_latency == doctest::Approx(0.038));
  }
}

TEST_CASE("pipeline totals") {
  const auto p = pipeline_cost(table());
  CHECK(rel(p.energy * 1e-3, 1.515) < 0.05);
  CHECK(rel(p.latency, 62.2) < 0.01);
  CHECK(p.latency == doctest::Approx(61.44 + 0.836));
  CHECK(rel(p.chip_area, 0.83) < 0.02);
  CHECK(std::abs(p.core_share() - 0.085) < 0.005);
}

TEST_CASE("energy is additive over components and phases") {
  const auto p = pipeline_cost(table());
  double sum = 0.0, core = 0.0;
  for (const auto& r : p.phases) {
    double phase = 0.0;
    for (const auto& c : r.components) {
      phase += c.energy;
      if (c.core) core += c.energy;
    }
    CHECK(r.energy == phase);
    sum += phase;
  }
  CHECK(p.energy == doctest::Approx(sum).epsilon(1e-15));
  CHECK(p.core_energy == doctest::Approx(core).epsilon(1e-15));
}

TEST_CASE("energy never drops when power or latency grows") {
  const double base = pipeline_cost(table()).energy;
  for (Phase ph : {Phase::extracting, Phase::computing}) {
    const auto& plan = table().phase(ph);
    for (std::size_t k = 0; k < plan.components.size(); ++k) {
      Catalog c = table();
      for (auto& p : c.phases)
        if (p.phase == ph) p.components[k].power *= 1.5;
      CHECK(pipeline_cost(c).energy > base);
    }
    Catalog c = table();
    for (auto& p : c.phases)
      if (p.phase == ph) p.total_latency *= 1.1;
    CHECK(pipeline_cost(c).energy >= base);
  }
}

TEST_CASE("zero-power component gives zero energy") {
  PhasePlan plan;
  plan.total_latency = 5.0;
  ComponentSpec c;
  c.name = "idle";
  plan.components.push_back(c);
  const auto r = rollup(plan);
  CHECK(r.energy == 0.0);
  CHECK(r.power == 0.0);
}

TEST_CASE("catalog text round-trip") {
  const auto text = catalog_to_text(table());
  const auto again = parse_catalog(text);
  CHECK(again == table());
  const auto a = pipeline_cost(table()), b = pipeline_cost(again);
  CHECK(a.energy == b.energy);
  CHECK(a.chip_area == b.chip_area);
  CHECK(report_text(a) == report_text(b));
}

TEST_CASE("identity scale leaves the catalog unchanged") {
  const auto s = scale(table(), {});
  CHECK(s == table());
  CHECK(s.notes.empty());
}

TEST_CASE("36 channels") {
  ScaleRequest req;
  req.channels = req.rows = req.cols = 36;
  const auto s = scale(table(), req);
  for (const char* d : {"WL Driver", "BL Driver", "SL Driver"}) {
    CHECK(find(s, Phase::extracting, d).count == 36);
    CHECK(find(s, Phase::extracting, d).power == doctest::Approx(2 * find(table(), Phase::extracting, d).power));
  }
  CHECK(find(s, Phase::computing, "S&H").count == 80);
  CHECK(find(s, Phase::extracting, "Crossbar").spec == "Size=36x36");
  CHECK(find(s, Phase::extracting, "Crossbar").area == doctest::Approx(4 * 3.24e-6));
  CHECK(find(s, Phase::computing, "ADC").count == 2);
  CHECK(s.notes.size() == 2);
  CHECK(pipeline_cost(s).energy > pipeline_cost(table()).energy);
}

TEST_CASE("6 s window doubles the extraction latency") {
  ScaleRequest req;
  req.window_seconds = 6.0;
  const auto s = scale(table(), req);
  CHECK(s.phase(Phase::extracting).total_latency == doctest::Approx(122.88).epsilon(1e-12));
  CHECK(s.phase(Phase::computing).total_latency == doctest::Approx(0.836));
  REQUIRE(s.notes.size() == 1);
  CHECK(s.notes[0].find("122.88 us") != std::string::npos);
  req.window_seconds = 3.0;
  req.slot_width = 500e-9;
  CHECK(scale(table(), req).phase(Phase::extracting).total_latency == doctest::Approx(768.0));
}

TEST_CASE("catalog errors carry the row number") {
  CHECK_THROWS_WITH_AS(parse_catalog(""), doctest::Contains("empty"), DataError);
  const std::string short_row = std::string(kHeader) + "phase,extracting,,,,,,,61.44,,,\ncomponent,extracting,X,,1,1,1\n";
  CHECK_THROWS_WITH_AS(parse_catalog(short_row), doctest::Contains("catalog row 3"), DataError);
  const std::string negative = std::string(kHeader) + "phase,extracting,,,,,,,61.44,,,\ncomponent,extracting,X,,1,-1,1,1,,,t,0\n";
  CHECK_THROWS_WITH_AS(parse_catalog(negative), doctest::Contains("catalog row 3"), DataError);
  const std::string phase = std::string(kHeader) + "phase,sleeping,,,,,,,1,,,\n";
  CHECK_THROWS_WITH_AS(parse_catalog(phase), doctest::Contains("catalog row 2"), DataError);
  const std::string no_latency = std::string(kHeader) + "component,computing,X,,1,1,1,1,,,t,0\n";
  CHECK_THROWS_AS(parse_catalog(no_latency), DataError);
  CHECK_THROWS_WITH_AS(load_catalog("/nonexistent/catalog.csv"), doctest::Contains("/nonexistent/catalog.csv"), DataError);
}

TEST_CASE("records output") {
  const auto text = report_records(pipeline_cost(table()), "cafe");
  CHECK(text.rfind("# config=cafe", 0) == 0);
  CHECK(text.find("Crossbar") != std::string::npos);
}
