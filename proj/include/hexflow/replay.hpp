#pragma once

// Event-log replay: re-derives per-aircraft metrics, the traversal stream
// and the entropy series from a run's JSONL log alone, then cross-checks
// them against the values the run reported in its footer.

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexflow/entropy.hpp"
#include "hexflow/pattern_map.hpp"
#include "hexflow/scenario.hpp"
#include "hexflow/simulation.hpp"

namespace hexflow {

struct ReplayedAircraft {
  int id = -1;
  double intro_time_s = 0.0;
  std::optional<double> entered_s;
  std::optional<double> arrived_s;
  std::optional<double> reported_travel_time_s;
  double path_miles = 0.0;
  int hold_count = 0;
};

struct ReplayedRun {
  ScenarioConfig config;
  std::string case_name;
  int replication = 0;
  std::vector<ReplayedAircraft> aircraft;
  std::vector<TraversalRecord> traversals;
  std::vector<SeriesRow> series;  // entropy/support/active recomputed on the sample grid
  double end_time_s = 0.0;
  bool timed_out = false;
  double footer_entropy = 0.0;
  int footer_support = 0;
  double recomputed_entropy = 0.0;
  int recomputed_support = 0;

  // travel-time consistency + footer entropy agreement
  std::vector<std::string> mismatches;
};

inline ReplayedRun replay_event_log(std::istream& is) {
  ReplayedRun out;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty event log");
  json header = json::parse(line);
  if (header.value("k", "") != "run_header") throw std::runtime_error("missing run_header line");
  out.config = scenario_from_json(header.at("config"));
  out.case_name = header.value("case", "");
  out.replication = header.value("replication", 0);

  std::map<int, ReplayedAircraft> aircraft;
  bool saw_footer = false;

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json e = json::parse(line);
    const std::string kind = e.value("k", "");
    if (kind == "run_footer") {
      out.end_time_s = e.value("end_s", 0.0);
      out.timed_out = e.value("timed_out", false);
      out.footer_entropy = e.value("total_entropy", 0.0);
      out.footer_support = e.value("support", 0);
      saw_footer = true;
      continue;
    }
    const double t = e.value("t", 0.0);
    const int ac = e.value("ac", -1);
    if (kind == "spawn_scheduled") {
      ReplayedAircraft& a = aircraft[ac];
      a.id = ac;
      a.intro_time_s = e.value("intro", t);
    } else if (kind == "entered_grid") {
      aircraft[ac].entered_s = t;
    } else if (kind == "hold_start") {
      aircraft[ac].hold_count += 1;
    } else if (kind == "entered_cell") {
      if (e.contains("pq"))
        out.traversals.push_back({{e.at("pq").get<int>(), e.at("pr").get<int>()},
                                  e.at("pentry").get<int>(), e.at("pexit").get<int>(), t});
    } else if (kind == "arrived") {
      ReplayedAircraft& a = aircraft[ac];
      a.arrived_s = t;
      a.reported_travel_time_s = e.value("tt", 0.0);
      a.path_miles = e.value("mi", 0.0);
      out.traversals.push_back({{e.at("q").get<int>(), e.at("r").get<int>()},
                                e.at("entry").get<int>(), e.at("e").get<int>(), t});
    }
  }
  if (!saw_footer) throw std::runtime_error("missing run_footer line");

  for (const auto& [id, a] : aircraft) out.aircraft.push_back(a);

  GridSpec grid(out.config.grid_radius, out.config.cell_edge_length_mi);
  PatternMap map;  // cumulative view is what entropy uses
  for (const TraversalRecord& r : out.traversals) map.record_traversal(r);

  const double period = out.config.series_period_s;
  for (std::int64_t i = 0; static_cast<double>(i) * period <= out.end_time_s + 1e-9; ++i) {
    const double t = static_cast<double>(i) * period;
    SeriesRow row;
    row.time_s = t;
    row.total_entropy = airspace_entropy(map, grid, t, out.config.entropy_log_base);
    row.support_size = airspace_support(map, grid, t);
    for (const auto& [id, a] : aircraft)
      if (a.entered_s && *a.entered_s <= t && !(a.arrived_s && *a.arrived_s <= t)) ++row.active_count;
    out.series.push_back(row);
  }
  out.recomputed_entropy = airspace_entropy(map, grid, out.end_time_s, out.config.entropy_log_base);
  out.recomputed_support = airspace_support(map, grid, out.end_time_s);

  if (std::fabs(out.recomputed_entropy - out.footer_entropy) > 1e-9)
    out.mismatches.push_back("total entropy: footer " + format_double(out.footer_entropy) +
                             " vs replay " + format_double(out.recomputed_entropy));
  if (out.recomputed_support != out.footer_support)
    out.mismatches.push_back("support: footer " + std::to_string(out.footer_support) +
                             " vs replay " + std::to_string(out.recomputed_support));
  for (const auto& [id, a] : aircraft) {
    if (a.arrived_s && a.reported_travel_time_s &&
        std::fabs((*a.arrived_s - a.intro_time_s) - *a.reported_travel_time_s) > 1e-9)
      out.mismatches.push_back("aircraft " + std::to_string(id) + ": travel time mismatch");
  }
  return out;
}

}  // namespace hexflow
