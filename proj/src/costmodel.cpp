#include "rramcim/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rramcim::cost {

std::string_view to_string(Phase phase) {
  return phase == Phase::extracting ? "extracting" : "computing";
}

void PhasePlan::validate() const {
  if (components.empty()) throw InvalidArgument(std::string(to_string(phase)) + " plan has no components");
  if (!(total_latency >= 0.0)) throw InvalidArgument("phase latency must be non-negative");
  for (const auto& c : components) {
    if (c.count < 0 || c.area < 0 || c.power < 0 || c.unit_latency < 0 || (c.total_latency && *c.total_latency < 0))
      throw InvalidArgument("component '" + c.name + "' has a negative quantity");
  }
}

const PhasePlan& Catalog::phase(Phase p) const {
  for (const auto& plan : phases)
    if (plan.phase == p) return plan;
  throw DataError("catalog has no " + std::string(to_string(p)) + " phase");
}

namespace {

Phase parse_phase(const std::string& text, int row) {
  if (text == "extracting") return Phase::extracting;
  if (text == "computing") return Phase::computing;
  throw DataError("catalog row " + std::to_string(row) + ": unknown phase '" + text + "'");
}

std::optional<double> optional_number(const std::string& text, const std::string& where) {
  if (trim(text).empty()) return std::nullopt;
  return parse_double(text, where);
}

PhasePlan& plan_for(Catalog& catalog, Phase phase) {
  for (auto& p : catalog.phases)
    if (p.phase == phase) return p;
  catalog.phases.push_back({phase, {}, 0.0, std::nullopt});
  return catalog.phases.back();
}

}  // namespace

Catalog parse_catalog(std::string_view text) {
  Catalog catalog;
  std::map<Phase, bool> has_latency;
  std::istringstream in{std::string(text)};
  std::string line;
  int row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(t, ',');
    if (!header_seen && cells[0] == "kind") {
      header_seen = true;
      continue;
    }
    if (cells.size() != 12)
      throw DataError("catalog row " + std::to_string(row) + ": expected 12 columns, found " + std::to_string(cells.size()));
    const std::string where = "catalog row " + std::to_string(row);
    const std::string kind = trim(cells[0]);
    const Phase phase = parse_phase(trim(cells[1]), row);
    auto& plan = plan_for(catalog, phase);
    if (kind == "phase") {
      const auto latency = optional_number(cells[8], where);
      if (!latency) throw DataError(where + ": phase row needs total_us");
      plan.total_latency = *latency;
      plan.table_energy = optional_number(cells[9], where);
      has_latency[phase] = true;
    } else if (kind == "component") {
      ComponentSpec c;
      c.name = trim(cells[2]);
      if (c.name.empty()) throw DataError(where + ": component needs a name");
      c.spec = trim(cells[3]);
      c.count = parse_double(cells[4], where);
      c.area = parse_double(cells[5], where);
      c.power = parse_double(cells[6], where);
      c.unit_latency = parse_double(cells[7], where);
      c.total_latency = optional_number(cells[8], where);
      c.table_energy = optional_number(cells[9], where);
      c.technology = trim(cells[10]);
      const std::string core = trim(cells[11]);
      if (core != "0" && core != "1") throw DataError(where + ": core must be 0 or 1");
      c.core = core == "1";
      if (c.count < 0 || c.area < 0 || c.power < 0 || c.unit_latency < 0 || (c.total_latency && *c.total_latency < 0))
        throw DataError(where + ": negative quantity");
      plan.components.push_back(std::move(c));
    } else {
      throw DataError(where + ": unknown row kind '" + kind + "'");
    }
  }
  if (catalog.phases.empty()) throw DataError("catalog is empty");
  for (const auto& p : catalog.phases)
    if (!has_latency[p.phase]) throw DataError("catalog: " + std::string(to_string(p.phase)) + " phase has no latency row");
  return catalog;
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_catalog(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string default_catalog_path() { return RRAMCIM_DEFAULT_CATALOG; }

std::string catalog_to_text(const Catalog& catalog) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::string out;
  for (const auto& note : catalog.notes) out += "# note: " + note + "\n";
  out += "kind,phase,name,spec,count,area_mm2,power_mw,unit_us,total_us,table_nj,technology,core\n";
  for (const auto& plan : catalog.phases) {
    const std::string phase(to_string(plan.phase));
    out += "phase," + phase + ",,,,,,," + format_double(plan.total_latency) + "," + opt(plan.table_energy) + ",,\n";
    for (const auto& c : plan.components)
      out += "component," + phase + "," + c.name + "," + c.spec + "," + format_double(c.count) + "," +
             format_double(c.area) + "," + format_double(c.power) + "," + format_double(c.unit_latency) + "," +
             opt(c.total_latency) + "," + opt(c.table_energy) + "," + c.technology + "," + (c.core ? "1" : "0") + "\n";
  }
  return out;
}

CostReport rollup(const PhasePlan& plan) {
  plan.validate();
  CostReport r;
  r.phase = plan.phase;
  r.latency = plan.total_latency;
  for (const auto& c : plan.components) {
    const double active = c.total_latency.value_or(plan.total_latency);
    const double energy = c.power * active;
    r.components.push_back({c.name, active, energy, c.table_energy, c.core});
    r.area += c.area;
    r.peak_power += c.power;
    r.energy += energy;
    if (c.core) r.core_energy += energy;
  }
  r.power = r.latency > 0.0 ? r.energy / r.latency : 0.0;
  return r;
}

PipelineCost pipeline_cost(const Catalog& catalog) {
  PipelineCost out;
  std::map<std::string, double> area_by_name;
  for (const auto& plan : catalog.phases) {
    auto report = rollup(plan);
    out.energy += report.energy;
    out.latency += report.latency;
    out.core_energy += report.core_energy;
    for (const auto& c : plan.components) area_by_name[c.name] = std::max(area_by_name[c.name], c.area);
    out.phases.push_back(std::move(report));
  }
  for (const auto& [name, area] : area_by_name) out.chip_area += area;
  return out;
}

Catalog scale(const Catalog& catalog, const ScaleRequest& req) {
  if (req.channels == 0 || req.rows == 0 || req.cols == 0 || !(req.window_seconds > 0) ||
      !(req.sampling_rate > 0) || !(req.slot_width > 0))
    throw InvalidArgument("scale request needs positive sizes");
  constexpr double base_channels = 18.0, base_cells = 18.0 * 18.0;
  const double channel_ratio = static_cast<double>(req.channels) / base_channels;
  const double cell_ratio = static_cast<double>(req.rows * req.cols) / base_cells;
  const auto samples = static_cast<std::size_t>(std::llround(req.window_seconds * req.sampling_rate));
  const double extraction_us = 2.0 * static_cast<double>(samples) * req.slot_width * 1e6;

  Catalog out = catalog;
  for (auto& plan : out.phases) {
    for (auto& c : plan.components) {
      const bool per_line = c.name.find("Driver") != std::string::npos || c.name == "S&H";
      if (per_line && channel_ratio != 1.0) {
        const double count = std::round(c.count * channel_ratio);
        const double ratio = count / c.count;
        c.area *= ratio;
        c.power *= ratio;
        if (c.table_energy) *c.table_energy *= ratio;
        c.count = count;
        c.spec = "Number=" + format_double(count);
      } else if (c.name == "Crossbar" && cell_ratio != 1.0) {
        c.area *= cell_ratio;
        c.power *= cell_ratio;
        if (c.table_energy) *c.table_energy *= cell_ratio;
        c.spec = "Size=" + std::to_string(req.rows) + "x" + std::to_string(req.cols) +
                 (plan.phase == Phase::computing ? "+" + std::to_string(req.rows) + "x2" : "");
      }
    }
    if (plan.phase == Phase::extracting && std::abs(extraction_us - plan.total_latency) > 1e-9 * extraction_us) {
      if (plan.table_energy) *plan.table_energy *= extraction_us / plan.total_latency;
      plan.total_latency = extraction_us;
    }
  }
  if (channel_ratio != 1.0)
    out.notes.push_back("drivers and S&H scaled x" + format_double(channel_ratio) + " for " +
                        std::to_string(req.channels) + " channels");
  if (cell_ratio != 1.0)
    out.notes.push_back("crossbar area/power scaled x" + format_double(cell_ratio) + " for " +
                        std::to_string(req.rows) + "x" + std::to_string(req.cols) + " cells");
  for (const auto& plan : out.phases)
    if (plan.phase == Phase::extracting && plan.total_latency != catalog.phase(Phase::extracting).total_latency)
    {
      char note[128];
      std::snprintf(note, sizeof note, "extraction latency = 2 x %zu slots x %.6g ns = %.6g us", samples,
                    req.slot_width * 1e9, extraction_us);
      out.notes.push_back(note);
    }
  return out;
}

std::string report_text(const PipelineCost& cost) {
  std::string out;
  char line[192];
  for (const auto& r : cost.phases) {
    out += "== " + std::string(to_string(r.phase)) + "\n";
    std::snprintf(line, sizeof line, "%-16s %12s %14s %14s\n", "component", "active(us)", "energy(nJ)", "table(nJ)");
    out += line;
    for (const auto& c : r.components) {
      const std::string table = c.table_energy ? format_double(*c.table_energy) : "-";
      std::snprintf(line, sizeof line, "%-16s %12.4g %14.4g %14s%s\n", c.name.c_str(), c.active_latency, c.energy,
                    table.c_str(), c.core ? "  core" : "");
      out += line;
    }
    std::snprintf(line, sizeof line,
                  "total: area %.4g mm2, power %.4g mW (peak %.4g), latency %.4g us, energy %.4g nJ\n", r.area,
                  r.power, r.peak_power, r.latency, r.energy);
    out += line;
  }
  std::snprintf(line, sizeof line,
                "pipeline: energy %.4g uJ, latency %.4g us, chip area %.4g mm2, core share %.2f%%\n",
                cost.energy * 1e-3, cost.latency, cost.chip_area, 100.0 * cost.core_share());
  out += line;
  return out;
}

std::string report_records(const PipelineCost& cost, const std::string& config_hash) {
  std::string out = "# config=" + config_hash + "\n";
  out += "scope,name,area_mm2,power_mw,latency_us,energy_nj,table_energy_nj\n";
  for (const auto& r : cost.phases) {
    const std::string phase(to_string(r.phase));
    for (const auto& c : r.components)
      out += phase + "," + c.name + ",,," + format_double(c.active_latency) + "," + format_double(c.energy) + "," +
             (c.table_energy ? format_double(*c.table_energy) : "") + "\n";
    out += phase + ",total," + format_double(r.area) + "," + format_double(r.power) + "," + format_double(r.latency) +
           "," + format_double(r.energy) + ",\n";
  }
  out += "pipeline,total," + format_double(cost.chip_area) + ",," + format_double(cost.latency) + "," +
         format_double(cost.energy) + ",\n";
  out += "pipeline,core," + std::string(",,,") + format_double(cost.core_energy) + ",\n";
  return out;
}

}  // namespace rramcim::cost
