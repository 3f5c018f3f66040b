#pragma once

// Deterministic discrete-time engine. Aircraft are processed strictly in
// ascending id each tick: queued aircraft attempt to spawn, flying aircraft
// advance at constant speed along edge-midpoint segments, cell transitions
// enforce the one-aircraft-per-cell limit via hold timers, and every cell
// entry triggers a replan against the current traffic pattern map.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hexflow/adaptive_gain.hpp"
#include "hexflow/cost_model.hpp"
#include "hexflow/entropy.hpp"
#include "hexflow/geometry.hpp"
#include "hexflow/pattern_map.hpp"
#include "hexflow/planner.hpp"
#include "hexflow/scenario.hpp"
#include "hexflow/util.hpp"

namespace hexflow {

enum class EventKind {
  spawn_scheduled,
  entered_grid,
  entered_cell,
  hold_start,
  hold_expired,
  replanned,
  kt_updated,
  arrived,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::spawn_scheduled: return "spawn_scheduled";
    case EventKind::entered_grid: return "entered_grid";
    case EventKind::entered_cell: return "entered_cell";
    case EventKind::hold_start: return "hold_start";
    case EventKind::hold_expired: return "hold_expired";
    case EventKind::replanned: return "replanned";
    case EventKind::kt_updated: return "kt_updated";
    case EventKind::arrived: return "arrived";
  }
  return "?";
}

struct SimEvent {
  double time = 0.0;
  std::int64_t seq = 0;
  int aircraft = -1;
  EventKind kind = EventKind::spawn_scheduled;
  std::string payload;  // pre-rendered `"key":value` fragments

  std::string to_line() const {
    std::string s = "{\"t\":" + format_double(time) + ",\"seq\":" + std::to_string(seq) +
                    ",\"ac\":" + std::to_string(aircraft) + ",\"k\":\"" + to_string(kind) + "\"";
    if (!payload.empty()) {
      s += ',';
      s += payload;
    }
    s += '}';
    return s;
  }
};

namespace detail {

struct Payload {
  std::string s;
  Payload& kv(const char* k, int v) { return raw(k, std::to_string(v)); }
  Payload& kv(const char* k, std::int64_t v) { return raw(k, std::to_string(v)); }
  Payload& kv(const char* k, double v) { return raw(k, format_double(v)); }
  Payload& kv(const char* k, const char* v) { return raw(k, std::string("\"") + v + "\""); }
  Payload& raw(const char* k, const std::string& v) {
    if (!s.empty()) s += ',';
    s += '"';
    s += k;
    s += "\":";
    s += v;
    return *this;
  }
};

}  // namespace detail

enum class Phase { queued, flying, holding, arrived };

struct AircraftState {
  int id = -1;
  EdgeRef origin;
  EdgeRef destination;
  double intro_time = 0.0;
  Phase phase = Phase::queued;
  bool intro_announced = false;

  CellCoord cell{};
  EdgeIndex entry_edge = 1;  // edge through which the current cell was entered
  EdgeRef at_node;           // node of the last reached edge midpoint
  Vec2 pos{};
  std::optional<Vec2> heading;  // unit direction of the current segment
  bool segment_pending = false; // heading not yet charged for the next segment

  std::vector<EdgeRef> waypoints;  // within-cell nodes still to visit
  std::size_t next_wp = 0;
  bool leg_crosses = false;  // after the waypoints, cross into `cross_into`
  EdgeRef cross_into;
  std::optional<double> dwell_until;    // timed U-turn transit in progress
  std::optional<double> hold_deadline;
  double spawned_clock = -1.0;

  double kt = 0.0;
  bool kt_initialized = false;

  std::optional<double> entry_time;
  std::optional<double> arrival_time;
  double path_miles = 0.0;
  double cum_heading_deg = 0.0;
  int hold_count = 0;
  double planned_cost = 0.0;
};

struct AircraftMetrics {
  int id = -1;
  double intro_time_s = 0.0;
  std::optional<double> travel_time_s;
  double path_miles = 0.0;
  double cum_heading_deg = 0.0;
  int hold_count = 0;
};

struct SeriesRow {
  double time_s = 0.0;
  int active_count = 0;
  double total_entropy = 0.0;
  double mean_kt = 0.0;
  int support_size = 0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<SimEvent> events;
  std::vector<AircraftMetrics> aircraft;
  std::vector<SeriesRow> series;
  std::vector<TraversalRecord> traversals;
  double end_time_s = 0.0;
  bool timed_out = false;
  double final_entropy = 0.0;
  int final_support = 0;
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, ODAssignment ods)
      : cfg_(cfg),
        grid_(cfg.grid_radius, cfg.cell_edge_length_mi),
        map_(cfg.discount_window_s),
        occupancy_(grid_.cell_count(), -1) {
    if (static_cast<int>(ods.size()) != cfg.total_aircraft())
      throw std::invalid_argument("OD assignment size does not match the spawn schedule");

    u_by_cell_.assign(grid_.cell_count(), unimpeded_cost_matrix(grid_, grid_.cells().front()));
    for (const UnimpededOverride& o : cfg.unimpeded_overrides)
      u_by_cell_[grid_.cell_index(o.cell)](o.entry, o.exit) = o.cost_mi;

    int id = 0;
    for (const auto& [time, count] : cfg.spawn_schedule) {
      for (int i = 0; i < count; ++i) {
        AircraftState a;
        a.id = id;
        a.origin = ods[static_cast<std::size_t>(id)].origin;
        a.destination = ods[static_cast<std::size_t>(id)].destination;
        a.intro_time = time;
        if (cfg.kt_mode == KtMode::fixed) a.kt = cfg.kt_fixed_value;
        aircraft_.push_back(a);
        ++id;
      }
    }
    speed_mi_per_s_ = cfg.speed_mph / 3600.0;
    uturn_duration_s_ = 4.0 * cfg.cell_edge_length_mi / speed_mi_per_s_;
  }

  const GridSpec& grid() const { return grid_; }
  const PatternMap& pattern_map() const { return map_; }
  const std::vector<AircraftState>& aircraft() const { return aircraft_; }
  const std::vector<SimEvent>& events() const { return events_; }
  double clock() const { return clock_; }

  bool all_arrived() const {
    for (const AircraftState& a : aircraft_)
      if (a.phase != Phase::arrived) return false;
    return true;
  }

  int active_count() const {
    int n = 0;
    for (const AircraftState& a : aircraft_)
      if (a.phase == Phase::flying || a.phase == Phase::holding) ++n;
    return n;
  }

  int own_cell_index(const AircraftState& a) const {
    return static_cast<int>(grid_.cell_index(a.cell));
  }

  // Advances the clock one tick and processes every aircraft in id order.
  // Returns the events emitted during this tick.
  std::vector<SimEvent> step() {
    ++tick_;
    clock_ = static_cast<double>(tick_) * cfg_.dt_s;
    const std::size_t first = events_.size();
    process_tick();
    return {events_.begin() + static_cast<std::ptrdiff_t>(first), events_.end()};
  }

  RunResult run() {
    const double max_time = cfg_.effective_max_time();
    process_tick();  // tick 0: spawns only, no movement
    maybe_sample_series();
    while (!all_arrived() && clock_ + cfg_.dt_s <= max_time + 1e-9) {
      step();
      maybe_sample_series();
    }

    RunResult res;
    res.events = std::move(events_);
    res.series = std::move(series_);
    if (res.series.empty() || res.series.back().time_s != clock_) res.series.push_back(sample_now());
    res.traversals = map_.all_records();
    res.end_time_s = clock_;
    res.timed_out = !all_arrived();
    res.final_entropy = airspace_entropy(map_, grid_, clock_, cfg_.entropy_log_base);
    res.final_support = airspace_support(map_, grid_, clock_);
    for (const AircraftState& a : aircraft_) {
      AircraftMetrics m;
      m.id = a.id;
      m.intro_time_s = a.intro_time;
      if (a.arrival_time) m.travel_time_s = *a.arrival_time - a.intro_time;
      m.path_miles = a.path_miles;
      m.cum_heading_deg = a.cum_heading_deg;
      m.hold_count = a.hold_count;
      res.aircraft.push_back(m);
    }
    return res;
  }

 private:
  static constexpr double kTinyMi = 1e-9;
  static constexpr double kTimeEps = 1e-9;

  void process_tick() {
    for (AircraftState& a : aircraft_) {
      switch (a.phase) {
        case Phase::queued: try_spawn(a); break;
        case Phase::flying: tick_flying(a); break;
        case Phase::holding: tick_holding(a); break;
        case Phase::arrived: break;
      }
    }
  }

  void try_spawn(AircraftState& a) {
    if (a.intro_time > clock_ + kTimeEps) return;
    if (!a.intro_announced) {
      a.intro_announced = true;
      detail::Payload p;
      p.kv("oq", a.origin.cell.q).kv("or", a.origin.cell.r).kv("oe", a.origin.edge);
      p.kv("dq", a.destination.cell.q).kv("dr", a.destination.cell.r).kv("de", a.destination.edge);
      p.kv("intro", a.intro_time);
      emit(a.id, EventKind::spawn_scheduled, p.s);
    }
    const std::size_t origin_cell = grid_.cell_index(a.origin.cell);
    if (occupancy_[origin_cell] != -1) return;  // retried next tick
    // keep one cell of headroom: crossings preserve the number of free
    // cells, so only spawning can fill the grid completely, and a full grid
    // can never move again
    if (active_count() + 1 >= static_cast<int>(grid_.cell_count())) return;

    occupancy_[origin_cell] = a.id;
    a.phase = Phase::flying;
    a.cell = a.origin.cell;
    a.entry_edge = a.origin.edge;
    a.at_node = a.origin;
    a.pos = edge_midpoint(grid_, a.origin);
    a.entry_time = clock_;
    a.spawned_clock = clock_;
    {
      detail::Payload p;
      p.kv("q", a.cell.q).kv("r", a.cell.r).kv("e", a.entry_edge);
      emit(a.id, EventKind::entered_grid, p.s);
    }
    {
      detail::Payload p;
      p.kv("q", a.cell.q).kv("r", a.cell.r).kv("entry", a.entry_edge);
      emit(a.id, EventKind::entered_cell, p.s);
    }
    if (cfg_.kt_mode == KtMode::adaptive) update_kt(a);
    replan(a, "spawn");
  }

  void tick_flying(AircraftState& a) {
    if (cfg_.kt_mode == KtMode::adaptive && on_kt_boundary()) update_kt(a);
    if (a.dwell_until) {
      if (clock_ + kTimeEps < *a.dwell_until) return;
      a.dwell_until.reset();
      finish_dwell(a);
      return;
    }
    if (a.spawned_clock == clock_) return;  // movement starts next tick
    advance(a, speed_mi_per_s_ * cfg_.dt_s);
  }

  void tick_holding(AircraftState& a) {
    if (cfg_.kt_mode == KtMode::adaptive && on_kt_boundary()) update_kt(a);
    const std::size_t target = grid_.cell_index(a.cross_into.cell);
    if (occupancy_[target] == -1) {
      a.hold_deadline.reset();
      a.phase = Phase::flying;
      do_cross(a);
      if (a.phase == Phase::flying && !a.dwell_until) advance(a, speed_mi_per_s_ * cfg_.dt_s);
      return;
    }
    if (a.hold_deadline && clock_ + kTimeEps >= *a.hold_deadline) {
      a.hold_deadline.reset();
      {
        detail::Payload p;
        p.kv("q", a.cell.q).kv("r", a.cell.r).kv("exit", a.at_node.edge);
        emit(a.id, EventKind::hold_expired, p.s);
      }
      a.phase = Phase::flying;
      replan(a, "hold");
      if (a.phase != Phase::flying || a.dwell_until) return;
      if (a.next_wp >= a.waypoints.size() && a.leg_crosses) {
        attempt_cross(a);
        if (a.phase != Phase::flying || a.dwell_until) return;
      }
      advance(a, speed_mi_per_s_ * cfg_.dt_s);
    }
  }

  // Straight-line motion through the remaining waypoints of the current leg,
  // crossing cells and replanning as transitions are reached.
  void advance(AircraftState& a, double budget) {
    while (budget > kTinyMi && a.phase == Phase::flying && !a.dwell_until) {
      if (a.next_wp < a.waypoints.size()) {
        const EdgeRef wp = a.waypoints[a.next_wp];
        const Vec2 target = edge_midpoint(grid_, wp);
        const double d = dist(a.pos, target);
        if (d <= kTinyMi) {
          reach_waypoint(a, wp, target);
          continue;
        }
        if (a.segment_pending) {
          const Vec2 u = (1.0 / d) * (target - a.pos);
          charge_heading(a, u);
          a.segment_pending = false;
        }
        if (d > budget) {
          a.pos = a.pos + (budget / d) * (target - a.pos);
          a.path_miles += budget;
          return;
        }
        a.pos = target;
        a.path_miles += d;
        budget -= d;
        reach_waypoint(a, wp, target);
      } else if (a.leg_crosses) {
        attempt_cross(a);
      } else {
        // Trivial leg: already at the destination node.
        arrive(a);
      }
    }
  }

  void reach_waypoint(AircraftState& a, EdgeRef wp, Vec2 target) {
    a.pos = target;
    a.at_node = wp;
    ++a.next_wp;
    a.segment_pending = true;
    // The last node of a non-crossing leg is the destination by path
    // construction; a mid-leg touch of the destination midpoint also ends
    // the flight.
    if (wp == a.destination) arrive(a);
  }

  void attempt_cross(AircraftState& a) {
    const std::size_t target = grid_.cell_index(a.cross_into.cell);
    if (occupancy_[target] == -1) {
      do_cross(a);
      return;
    }
    a.phase = Phase::holding;
    a.hold_deadline = clock_ + cfg_.t_hold_s;
    ++a.hold_count;
    detail::Payload p;
    p.kv("q", a.cell.q).kv("r", a.cell.r).kv("exit", a.at_node.edge).kv("until", *a.hold_deadline);
    emit(a.id, EventKind::hold_start, p.s);
  }

  void do_cross(AircraftState& a) {
    const CellCoord prev_cell = a.cell;
    const EdgeIndex prev_entry = a.entry_edge;
    const EdgeIndex prev_exit = a.at_node.edge;
    map_.record_traversal({prev_cell, prev_entry, prev_exit, clock_});

    occupancy_[grid_.cell_index(prev_cell)] = -1;
    occupancy_[grid_.cell_index(a.cross_into.cell)] = a.id;
    a.cell = a.cross_into.cell;
    a.entry_edge = a.cross_into.edge;
    a.at_node = a.cross_into;

    detail::Payload p;
    p.kv("q", a.cell.q).kv("r", a.cell.r).kv("entry", a.entry_edge);
    p.kv("pq", prev_cell.q).kv("pr", prev_cell.r).kv("pentry", prev_entry).kv("pexit", prev_exit);
    emit(a.id, EventKind::entered_cell, p.s);

    replan(a, "enter");
  }

  void arrive(AircraftState& a) {
    map_.record_traversal({a.cell, a.entry_edge, a.destination.edge, clock_});
    occupancy_[grid_.cell_index(a.cell)] = -1;
    a.phase = Phase::arrived;
    a.arrival_time = clock_;
    detail::Payload p;
    p.kv("q", a.cell.q).kv("r", a.cell.r).kv("e", a.destination.edge).kv("entry", a.entry_edge);
    p.kv("tt", clock_ - a.intro_time).kv("mi", a.path_miles);
    emit(a.id, EventKind::arrived, p.s);
  }

  // Rebuilds the aircraft's plan from the node it currently occupies.
  // Crossings into cells that are occupied right now carry a surcharge, so
  // plans prefer free airspace in proportion to the detour it costs; a
  // hold-expiry replan then finds the next best cell to move towards on its
  // own whenever the blocked one is not worth another wait.
  void replan(AircraftState& a, const char* why) {
    // Inside the destination cell the flight ends at the destination
    // midpoint; the edge graph cannot add anything but degenerate detours.
    if (a.cell == a.destination.cell) {
      a.waypoints.assign(1, a.destination);
      a.next_wp = 0;
      a.leg_crosses = false;
      a.segment_pending = true;
      const FollowingGain g{cfg_.kt_mode == KtMode::fixed ? cfg_.kt_fixed_value : a.kt};
      const CostMatrix c =
          total_cost(u_by_cell_[grid_.cell_index(a.cell)], map_.windowed_matrix(a.cell, clock_),
                     g, cfg_.traffic_cost_scale);
      a.planned_cost = std::max(0.0, c(a.at_node.edge, a.destination.edge));
      detail::Payload p;
      p.kv("q", a.at_node.cell.q).kv("r", a.at_node.cell.r).kv("e", a.at_node.edge);
      p.kv("cost", a.planned_cost).kv("hops", 1).kv("why", why);
      emit(a.id, EventKind::replanned, p.s);
      return;
    }
    const FollowingGain gain{cfg_.kt_mode == KtMode::fixed ? cfg_.kt_fixed_value : a.kt};
    EdgeGraph g = build_edge_graph(grid_, map_, gain, clock_, &u_by_cell_, cfg_.traffic_cost_scale);
    if (cfg_.occupancy_penalty_mi > 0.0) {
      for (int u = 0; u < g.node_count(); ++u) {
        for (int k = g.offsets[static_cast<std::size_t>(u)];
             k < g.offsets[static_cast<std::size_t>(u) + 1]; ++k) {
          const int v = g.targets[static_cast<std::size_t>(k)];
          if (u / 6 == v / 6) continue;  // within-cell arc
          const std::size_t target_cell = static_cast<std::size_t>(v / 6);
          if (occupancy_[target_cell] != -1 && static_cast<int>(target_cell) != own_cell_index(a))
            g.weights[static_cast<std::size_t>(k)] += cfg_.occupancy_penalty_mi;
        }
      }
    }
    const PlannedPath path = least_cost_path(g, a.at_node, a.destination);
    a.planned_cost = path.total_cost;

    detail::Payload p;
    p.kv("q", a.at_node.cell.q).kv("r", a.at_node.cell.r).kv("e", a.at_node.edge);
    p.kv("cost", path.total_cost).kv("hops", static_cast<int>(path.nodes.size()) - 1).kv("why", why);
    emit(a.id, EventKind::replanned, p.s);

    build_leg(a, path);
  }

  // Splits the planned path into the within-cell waypoints up to the first
  // cell crossing. A leg that exits through the cell's entry edge is the
  // priced U-turn: it is executed as a timed dwell rather than as geometric
  // wandering, after which the aircraft crosses from the entry-edge midpoint.
  void build_leg(AircraftState& a, const PlannedPath& path) {
    a.waypoints.clear();
    a.next_wp = 0;
    a.leg_crosses = false;
    a.segment_pending = true;

    std::size_t cross_at = path.nodes.size();
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
      if (!(path.nodes[i].cell == path.nodes[i + 1].cell)) {
        cross_at = i;
        break;
      }
    }
    if (cross_at == path.nodes.size()) {
      a.waypoints.assign(path.nodes.begin() + 1, path.nodes.end());
      if (path.nodes.size() == 1 && path.nodes.front() == a.destination) {
        arrive(a);
      }
      return;
    }
    a.leg_crosses = true;
    a.cross_into = path.nodes[cross_at + 1];
    const EdgeRef cross_node = path.nodes[cross_at];
    if (cross_node.edge == a.entry_edge) {
      a.waypoints.assign(1, cross_node);
      a.next_wp = 1;  // dwell substitutes for the within-cell travel
      a.dwell_until = clock_ + uturn_duration_s_;
      return;
    }
    a.waypoints.assign(path.nodes.begin() + 1, path.nodes.begin() + static_cast<std::ptrdiff_t>(cross_at) + 1);
  }

  void finish_dwell(AircraftState& a) {
    const EdgeRef exit_node = a.waypoints.back();
    a.pos = edge_midpoint(grid_, exit_node);
    a.at_node = exit_node;
    attempt_cross(a);
  }

  void update_kt(AircraftState& a) {
    std::vector<Vec2> others;
    others.reserve(aircraft_.size());
    for (const AircraftState& b : aircraft_)
      if (b.id != a.id && (b.phase == Phase::flying || b.phase == Phase::holding))
        others.push_back(b.pos);
    const double rho = local_density(a.pos, others, {cfg_.range_rs_mi}, grid_);
    const double raw = kt_from_density(rho, {cfg_.sigmoid_ceiling, cfg_.sigmoid_midpoint_density,
                                             cfg_.sigmoid_slope_scale})
                           .kt;
    const double next = std::min(raw, cfg_.kt_max);
    if (a.kt_initialized && std::fabs(next - a.kt) <= 1e-12) return;
    detail::Payload p;
    p.kv("old", a.kt_initialized ? a.kt : 0.0).kv("new", next).kv("rho", rho);
    emit(a.id, EventKind::kt_updated, p.s);
    a.kt = next;
    a.kt_initialized = true;
  }

  bool on_kt_boundary() const {
    const double k = std::round(clock_ / cfg_.kt_update_period_s);
    return std::fabs(clock_ - k * cfg_.kt_update_period_s) < cfg_.dt_s * 0.5;
  }

  bool on_series_boundary() const {
    const double k = std::round(clock_ / cfg_.series_period_s);
    return std::fabs(clock_ - k * cfg_.series_period_s) < cfg_.dt_s * 0.5;
  }

  void maybe_sample_series() {
    if (!on_series_boundary()) return;
    if (!series_.empty() && series_.back().time_s == clock_) return;
    series_.push_back(sample_now());
  }

  SeriesRow sample_now() const {
    SeriesRow row;
    row.time_s = clock_;
    double kt_sum = 0.0;
    for (const AircraftState& a : aircraft_) {
      if (a.phase == Phase::flying || a.phase == Phase::holding) {
        ++row.active_count;
        kt_sum += cfg_.kt_mode == KtMode::fixed ? cfg_.kt_fixed_value : a.kt;
      }
    }
    row.mean_kt = row.active_count > 0 ? kt_sum / row.active_count : 0.0;
    row.total_entropy = airspace_entropy(map_, grid_, clock_, cfg_.entropy_log_base);
    row.support_size = airspace_support(map_, grid_, clock_);
    return row;
  }

  void charge_heading(AircraftState& a, Vec2 u) {
    if (a.heading) {
      const double cross = a.heading->x * u.y - a.heading->y * u.x;
      const double dot = a.heading->x * u.x + a.heading->y * u.y;
      const double angle = std::atan2(std::fabs(cross), dot);
      if (angle > 1e-12) a.cum_heading_deg += angle * 180.0 / std::acos(-1.0);
    }
    a.heading = u;
  }

  void emit(int aircraft_id, EventKind kind, std::string payload) {
    events_.push_back({clock_, static_cast<std::int64_t>(events_.size()) + 1, aircraft_id, kind,
                       std::move(payload)});
  }

  ScenarioConfig cfg_;
  GridSpec grid_;
  PatternMap map_;
  std::vector<CostMatrix> u_by_cell_;
  std::vector<AircraftState> aircraft_;
  std::vector<int> occupancy_;  // cell index -> aircraft id or -1
  std::vector<SimEvent> events_;
  std::vector<SeriesRow> series_;
  double speed_mi_per_s_ = 0.0;
  double uturn_duration_s_ = 0.0;
  std::int64_t tick_ = 0;
  double clock_ = 0.0;
};

// Runs one replication: ODs are drawn from the replication's child seed so
// different cases at the same replication share identical assignments.
inline RunResult run_simulation(const ScenarioConfig& cfg, int replication) {
  const std::uint64_t seed = child_seed(cfg.master_seed, static_cast<std::uint64_t>(replication));
  GridSpec grid(cfg.grid_radius, cfg.cell_edge_length_mi);
  Rng rng(seed);
  const std::vector<EdgeRef> boundary = boundary_edges(grid);
  ODAssignment ods = sample_od_assignment(boundary, cfg.total_aircraft(), rng);
  Simulation sim(cfg, std::move(ods));
  RunResult res = sim.run();
  res.seed = seed;
  return res;
}

}  // namespace hexflow
