#pragma once

// Area/power/latency/energy roll-up over a component catalog.
//
// Every component in a phase is assumed active for the whole phase unless it
// carries its own active time (total_us). Energy is power x active time
// (mW x us = nJ). A phase's reported power is its energy over its latency.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rramcim/common.hpp"

namespace rramcim::cost {

enum class Phase { extracting, computing };
std::string_view to_string(Phase phase);

struct ComponentSpec {
  std::string name;
  std::string spec;
  double count = 0.0;
  double area = 0.0;          // mm^2
  double power = 0.0;         // mW
  double unit_latency = 0.0;  // us
  std::optional<double> total_latency;  // us
  std::optional<double> table_energy;   // nJ, published value kept for comparison
  std::string technology;
  bool core = false;

  bool operator==(const ComponentSpec&) const = default;
};

struct PhasePlan {
  Phase phase = Phase::extracting;
  std::vector<ComponentSpec> components;
  double total_latency = 0.0;  // us
  std::optional<double> table_energy;

  void validate() const;
  bool operator==(const PhasePlan&) const = default;
};

struct Catalog {
  std::vector<PhasePlan> phases;
  std::vector<std::string> notes;  // assumptions applied by scale()

  const PhasePlan& phase(Phase p) const;
  bool operator==(const Catalog&) const = default;
};

Catalog parse_catalog(std::string_view text);
Catalog load_catalog(const std::string& path);
std::string catalog_to_text(const Catalog& catalog);
std::string default_catalog_path();

struct ComponentCost {
  std::string name;
  double active_latency;  // us
  double energy;          // nJ, computed
  std::optional<double> table_energy;
  bool core;
};

struct CostReport {
  Phase phase = Phase::extracting;
  std::vector<ComponentCost> components;
  double area = 0.0;        // mm^2
  double peak_power = 0.0;  // mW, every component on at once
  double power = 0.0;       // mW, energy / latency
  double latency = 0.0;     // us
  double energy = 0.0;      // nJ
  double core_energy = 0.0;
};

CostReport rollup(const PhasePlan& plan);

struct PipelineCost {
  std::vector<CostReport> phases;
  double energy = 0.0;      // nJ
  double latency = 0.0;     // us
  double chip_area = 0.0;   // mm^2, each distinct component counted once at its largest area
  double core_energy = 0.0; // nJ
  double core_share() const { return energy > 0.0 ? core_energy / energy : 0.0; }
};

PipelineCost pipeline_cost(const Catalog& catalog);

struct ScaleRequest {
  std::size_t channels = 18;
  std::size_t rows = 18;
  std::size_t cols = 18;
  double window_seconds = 3.0;
  double sampling_rate = 256.0;
  double slot_width = 40e-9;  // s
};

/// Rescales a catalog built for 18 channels, an 18x18 array and 3 s windows
/// at 256 Hz with 40 ns slots:
///   drivers and S&H units scale linearly with channel count (area, power too);
///   crossbar area and power scale with rows x cols;
///   extraction latency = 2 x samples per window x slot width;
///   everything else is unchanged.
/// Each applied rule is appended to Catalog::notes.
Catalog scale(const Catalog& catalog, const ScaleRequest& request);

std::string report_text(const PipelineCost& cost);
std::string report_records(const PipelineCost& cost, const std::string& config_hash);

}  // namespace rramcim::cost
