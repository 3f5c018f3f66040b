#pragma once

// Scenario configuration: a versioned, human-readable JSON schema with
// units embedded in the field names, plus random origin/destination
// assignment over the outer-ring boundary edges.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexflow/geometry.hpp"
#include "hexflow/rng.hpp"
#include "hexflow/util.hpp"

namespace hexflow {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class KtMode { fixed, adaptive };

struct UnimpededOverride {
  CellCoord cell;
  EdgeIndex entry = 1;
  EdgeIndex exit = 1;
  double cost_mi = 0.0;
};

struct ScenarioConfig {
  int schema_version = 1;
  int grid_radius = 5;
  double cell_edge_length_mi = 2.5;
  double speed_mph = 250.0;
  double dt_s = 1.0;
  double t_hold_s = 150.0;
  std::optional<double> discount_window_s;  // absent = keep full history
  KtMode kt_mode = KtMode::adaptive;
  double kt_fixed_value = 0.0;  // used when kt_mode == fixed
  double sigmoid_ceiling = 6.024;
  double sigmoid_midpoint_density = 0.0075965;
  double sigmoid_slope_scale = 0.0005;
  double kt_update_period_s = 100.0;
  double range_rs_mi = 50.0;
  std::vector<std::pair<double, int>> spawn_schedule;  // (time_s, count)
  int replications = 15;
  std::uint64_t master_seed = 1;
  std::optional<double> max_time_s;  // absent = 10x the schedule span
  double entropy_log_base = 0.0;     // 0 = natural log
  double series_period_s = 10.0;
  double traffic_cost_scale = 1.0;
  double kt_max = 6.024;
  double occupancy_penalty_mi = 10.0;  // surcharge for planning into an occupied cell
  bool pair_cases_by_replication = true;
  std::vector<UnimpededOverride> unimpeded_overrides;

  double schedule_end() const {
    return spawn_schedule.empty() ? 0.0 : spawn_schedule.back().first;
  }

  double effective_max_time() const {
    if (max_time_s) return *max_time_s;
    return 10.0 * std::max(schedule_end(), 1000.0);
  }

  int total_aircraft() const {
    int n = 0;
    for (const auto& [t, c] : spawn_schedule) n += c;
    return n;
  }
};

namespace detail {

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

template <typename T>
T get_field(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + key + ": " + e.what());
  }
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const json& j, const std::string& path = "") {
  using detail::get_field;
  ScenarioConfig c;
  c.schema_version = get_field(j, path, "schema_version", c.schema_version);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.grid_radius = get_field(g, path + "grid.", "radius", c.grid_radius);
    c.cell_edge_length_mi = get_field(g, path + "grid.", "cell_edge_length_mi", c.cell_edge_length_mi);
  }
  c.speed_mph = get_field(j, path, "speed_mph", c.speed_mph);
  c.dt_s = get_field(j, path, "dt_s", c.dt_s);
  c.t_hold_s = get_field(j, path, "t_hold_s", c.t_hold_s);
  if (j.contains("discount_window_s") && !j.at("discount_window_s").is_null())
    c.discount_window_s = get_field(j, path, "discount_window_s", 0.0);
  if (j.contains("kt_mode")) {
    const json& m = j.at("kt_mode");
    const std::string mode = detail::get_field<std::string>(m, path + "kt_mode.", "mode", "adaptive");
    if (mode == "fixed") {
      c.kt_mode = KtMode::fixed;
      c.kt_fixed_value = get_field(m, path + "kt_mode.", "value", 0.0);
    } else if (mode == "adaptive") {
      c.kt_mode = KtMode::adaptive;
    } else {
      throw ConfigError(path + "kt_mode.mode: expected \"fixed\" or \"adaptive\", got \"" + mode + "\"");
    }
  }
  if (j.contains("sigmoid")) {
    const json& s = j.at("sigmoid");
    c.sigmoid_ceiling = get_field(s, path + "sigmoid.", "ceiling", c.sigmoid_ceiling);
    c.sigmoid_midpoint_density =
        get_field(s, path + "sigmoid.", "midpoint_density_per_sqmi", c.sigmoid_midpoint_density);
    c.sigmoid_slope_scale =
        get_field(s, path + "sigmoid.", "slope_scale_per_sqmi", c.sigmoid_slope_scale);
  }
  c.kt_update_period_s = get_field(j, path, "kt_update_period_s", c.kt_update_period_s);
  c.range_rs_mi = get_field(j, path, "range_rs_mi", c.range_rs_mi);
  if (j.contains("spawn_schedule")) {
    if (!j.at("spawn_schedule").is_array())
      throw ConfigError(path + "spawn_schedule: expected an array");
    int idx = 0;
    for (const json& e : j.at("spawn_schedule")) {
      const std::string epath = path + "spawn_schedule[" + std::to_string(idx) + "].";
      c.spawn_schedule.emplace_back(detail::get_field<double>(e, epath, "time_s", 0.0),
                                    detail::get_field<int>(e, epath, "count", 0));
      ++idx;
    }
  }
  c.replications = get_field(j, path, "replications", c.replications);
  c.master_seed = get_field(j, path, "master_seed", c.master_seed);
  if (j.contains("max_time_s") && !j.at("max_time_s").is_null())
    c.max_time_s = get_field(j, path, "max_time_s", 0.0);
  if (j.contains("entropy_log_base") && !j.at("entropy_log_base").is_null()) {
    const json& b = j.at("entropy_log_base");
    if (b.is_string()) {
      if (b.get<std::string>() != "e")
        throw ConfigError(path + "entropy_log_base: expected a number or \"e\"");
      c.entropy_log_base = 0.0;
    } else {
      c.entropy_log_base = get_field(j, path, "entropy_log_base", 0.0);
    }
  }
  c.series_period_s = get_field(j, path, "series_period_s", c.series_period_s);
  c.traffic_cost_scale = get_field(j, path, "traffic_cost_scale", c.traffic_cost_scale);
  c.kt_max = get_field(j, path, "kt_max", c.kt_max);
  c.occupancy_penalty_mi = get_field(j, path, "occupancy_penalty_mi", c.occupancy_penalty_mi);
  c.pair_cases_by_replication =
      get_field(j, path, "pair_cases_by_replication", c.pair_cases_by_replication);
  if (j.contains("unimpeded_overrides")) {
    int idx = 0;
    for (const json& e : j.at("unimpeded_overrides")) {
      const std::string epath = path + "unimpeded_overrides[" + std::to_string(idx) + "].";
      UnimpededOverride o;
      o.cell.q = detail::get_field<int>(e, epath, "q", 0);
      o.cell.r = detail::get_field<int>(e, epath, "r", 0);
      o.entry = detail::get_field<int>(e, epath, "entry", 1);
      o.exit = detail::get_field<int>(e, epath, "exit", 1);
      o.cost_mi = detail::get_field<double>(e, epath, "cost_mi", 0.0);
      c.unimpeded_overrides.push_back(o);
      ++idx;
    }
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return scenario_from_json(j);
}

inline json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["grid"] = {{"radius", c.grid_radius}, {"cell_edge_length_mi", c.cell_edge_length_mi}};
  j["speed_mph"] = c.speed_mph;
  j["dt_s"] = c.dt_s;
  j["t_hold_s"] = c.t_hold_s;
  j["discount_window_s"] = c.discount_window_s ? json(*c.discount_window_s) : json(nullptr);
  if (c.kt_mode == KtMode::fixed)
    j["kt_mode"] = {{"mode", "fixed"}, {"value", c.kt_fixed_value}};
  else
    j["kt_mode"] = {{"mode", "adaptive"}};
  j["sigmoid"] = {{"ceiling", c.sigmoid_ceiling},
                  {"midpoint_density_per_sqmi", c.sigmoid_midpoint_density},
                  {"slope_scale_per_sqmi", c.sigmoid_slope_scale}};
  j["kt_update_period_s"] = c.kt_update_period_s;
  j["range_rs_mi"] = c.range_rs_mi;
  json sched = json::array();
  for (const auto& [t, n] : c.spawn_schedule) sched.push_back({{"time_s", t}, {"count", n}});
  j["spawn_schedule"] = sched;
  j["replications"] = c.replications;
  j["master_seed"] = c.master_seed;
  j["max_time_s"] = c.max_time_s ? json(*c.max_time_s) : json(nullptr);
  j["entropy_log_base"] = c.entropy_log_base > 0.0 ? json(c.entropy_log_base) : json("e");
  j["series_period_s"] = c.series_period_s;
  j["traffic_cost_scale"] = c.traffic_cost_scale;
  j["kt_max"] = c.kt_max;
  j["occupancy_penalty_mi"] = c.occupancy_penalty_mi;
  j["pair_cases_by_replication"] = c.pair_cases_by_replication;
  if (!c.unimpeded_overrides.empty()) {
    json ov = json::array();
    for (const UnimpededOverride& o : c.unimpeded_overrides)
      ov.push_back({{"q", o.cell.q}, {"r", o.cell.r}, {"entry", o.entry}, {"exit", o.exit},
                    {"cost_mi", o.cost_mi}});
    j["unimpeded_overrides"] = ov;
  }
  return j;
}

inline std::string serialize_config(const ScenarioConfig& c) { return scenario_to_json(c).dump(2) + "\n"; }

inline std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> v;
  auto bad = [&v](const std::string& field, const std::string& why) { v.push_back(field + ": " + why); };

  if (c.schema_version != 1) bad("schema_version", "unsupported version " + std::to_string(c.schema_version));
  if (c.grid_radius < 1) bad("grid.radius", "must be >= 1");
  if (!(c.cell_edge_length_mi > 0.0)) bad("grid.cell_edge_length_mi", "must be > 0");
  if (!(c.speed_mph > 0.0)) bad("speed_mph", "must be > 0");
  if (!(c.dt_s > 0.0)) bad("dt_s", "must be > 0");
  if (c.t_hold_s < 0.0) bad("t_hold_s", "must be >= 0");
  if (c.discount_window_s && !(*c.discount_window_s > 0.0)) bad("discount_window_s", "must be > 0 when present");
  if (c.kt_mode == KtMode::fixed && (c.kt_fixed_value < 0.0 || c.kt_fixed_value > c.kt_max))
    bad("kt_mode.value", "must lie in [0, kt_max]");
  if (!(c.sigmoid_ceiling > 0.0)) bad("sigmoid.ceiling", "must be > 0");
  if (c.sigmoid_midpoint_density < 0.0) bad("sigmoid.midpoint_density_per_sqmi", "must be >= 0");
  if (!(c.sigmoid_slope_scale > 0.0)) bad("sigmoid.slope_scale_per_sqmi", "must be > 0");
  if (!(c.kt_update_period_s > 0.0)) bad("kt_update_period_s", "must be > 0");
  if (!(c.range_rs_mi > 0.0)) bad("range_rs_mi", "must be > 0");
  for (std::size_t i = 0; i < c.spawn_schedule.size(); ++i) {
    const std::string field = "spawn_schedule[" + std::to_string(i) + "]";
    if (c.spawn_schedule[i].first < 0.0) bad(field + ".time_s", "must be >= 0");
    if (c.spawn_schedule[i].second < 1) bad(field + ".count", "must be >= 1");
    if (i > 0 && !(c.spawn_schedule[i].first > c.spawn_schedule[i - 1].first))
      bad(field + ".time_s", "schedule times must be strictly increasing");
  }
  if (c.replications < 1) bad("replications", "must be >= 1");
  if (c.max_time_s && !(*c.max_time_s > 0.0)) bad("max_time_s", "must be > 0 when present");
  if (c.entropy_log_base < 0.0 || c.entropy_log_base == 1.0)
    bad("entropy_log_base", "must be \"e\" or a positive number != 1");
  if (!(c.series_period_s > 0.0)) bad("series_period_s", "must be > 0");
  if (c.traffic_cost_scale < 0.0) bad("traffic_cost_scale", "must be >= 0");
  if (!(c.kt_max > 0.0)) bad("kt_max", "must be > 0");
  if (c.occupancy_penalty_mi < 0.0) bad("occupancy_penalty_mi", "must be >= 0");
  for (std::size_t i = 0; i < c.unimpeded_overrides.size(); ++i) {
    const UnimpededOverride& o = c.unimpeded_overrides[i];
    const std::string field = "unimpeded_overrides[" + std::to_string(i) + "]";
    if (!is_valid_edge(o.entry)) bad(field + ".entry", "must lie in [1, 6]");
    if (!is_valid_edge(o.exit)) bad(field + ".exit", "must lie in [1, 6]");
    if (o.cost_mi < 0.0) bad(field + ".cost_mi", "must be >= 0");
    if (hex_distance(o.cell, {0, 0}) > c.grid_radius) bad(field, "cell lies outside the grid");
  }
  return v;
}

// One aircraft's endpoints: midpoints of two boundary edges that are
// neither identical nor adjacent along the perimeter.
struct ODPair {
  EdgeRef origin;
  EdgeRef destination;
};

using ODAssignment = std::vector<ODPair>;

// Uniform draw over valid ordered boundary-edge pairs by rejection.
// `boundary` must be in the canonical perimeter order, where adjacency is
// cyclic index distance one.
inline ODPair sample_od(const std::vector<EdgeRef>& boundary, Rng& rng) {
  const std::size_t m = boundary.size();
  if (m < 3) throw std::invalid_argument("need at least three boundary edges to sample");
  for (;;) {
    const std::size_t a = static_cast<std::size_t>(rng.below(m));
    const std::size_t b = static_cast<std::size_t>(rng.below(m));
    if (a == b) continue;
    const std::size_t d = a > b ? a - b : b - a;
    if (d == 1 || d == m - 1) continue;  // perimeter neighbors share a vertex
    return {boundary[a], boundary[b]};
  }
}

inline ODAssignment sample_od_assignment(const std::vector<EdgeRef>& boundary, int count, Rng& rng) {
  ODAssignment out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_od(boundary, rng));
  return out;
}

}  // namespace hexflow
