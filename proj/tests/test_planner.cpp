#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hexflow/pattern_map.hpp"
#include "hexflow/planner.hpp"
#include "hexflow/rng.hpp"

using namespace hexflow;

namespace {

// Exhaustive least-cost oracle, independent of the planner. The graph is
// rebuilt from first principles with the two views of each physical edge
// collapsed into one node, which removes the zero-cost coincident arcs (an
// exact transformation). The minimum is then found by depth-first
// enumeration of simple paths; pruning uses remaining-cost lower bounds
// from a backward Bellman-Ford relaxation, which stays admissible because
// Bellman-Ford converges to exact distances.
struct BruteForce {
  const GridSpec& grid;
  std::vector<int> phys_of;                               // (cell,edge) slot -> physical node
  std::vector<std::vector<std::pair<int, double>>> adj;   // physical node -> (node, weight)
  double best = std::numeric_limits<double>::infinity();

  BruteForce(const GridSpec& g, const PatternMap& map, double kt, double now) : grid(g) {
    const int slots = static_cast<int>(g.cell_count()) * 6;
    phys_of.assign(static_cast<std::size_t>(slots), -1);
    int next_id = 0;
    for (std::size_t ci = 0; ci < g.cell_count(); ++ci) {
      for (EdgeIndex e = 1; e <= 6; ++e) {
        const int slot = static_cast<int>(ci) * 6 + (e - 1);
        if (phys_of[static_cast<std::size_t>(slot)] != -1) continue;
        phys_of[static_cast<std::size_t>(slot)] = next_id;
        if (auto partner = coincident_edge(g, {g.cells()[ci], e})) {
          const int pslot =
              static_cast<int>(g.cell_index(partner->cell)) * 6 + (partner->edge - 1);
          phys_of[static_cast<std::size_t>(pslot)] = next_id;
        }
        ++next_id;
      }
    }
    adj.assign(static_cast<std::size_t>(next_id), {});
    for (std::size_t ci = 0; ci < g.cell_count(); ++ci) {
      const CellCoord cell = g.cells()[ci];
      const TrafficMatrix t = map.windowed_matrix(cell, now);
      const double s = static_cast<double>(t.grand_sum());
      for (EdgeIndex i = 1; i <= 6; ++i) {
        for (EdgeIndex j = 1; j <= 6; ++j) {
          if (i == j) continue;
          const double mid_dist =
              dist(edge_midpoint(g, {cell, i}), edge_midpoint(g, {cell, j}));
          const double traffic =
              s > 0.0 ? 1.0 - kt * static_cast<double>(t(i, j)) / s : 1.0;
          adj[static_cast<std::size_t>(node_of({cell, i}))].push_back(
              {node_of({cell, j}), std::max(0.0, mid_dist + traffic)});
        }
      }
    }
    for (auto& row : adj)
      std::sort(row.begin(), row.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
  }

  int node_of(EdgeRef e) const {
    return phys_of[static_cast<std::size_t>(
        static_cast<int>(grid.cell_index(e.cell)) * 6 + (e.edge - 1))];
  }

  // Exact distance-to-goal for every node by repeated edge relaxation.
  std::vector<double> to_goal(int goal) const {
    std::vector<double> h(adj.size(), std::numeric_limits<double>::infinity());
    h[static_cast<std::size_t>(goal)] = 0.0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t u = 0; u < adj.size(); ++u) {
        for (const auto& [v, w] : adj[u]) {
          if (h[static_cast<std::size_t>(v)] + w < h[u] - 1e-15) {
            h[u] = h[static_cast<std::size_t>(v)] + w;
            changed = true;
          }
        }
      }
    }
    return h;
  }

  void dfs(const std::vector<std::vector<std::pair<int, double>>>& ordered, int u, int goal,
           double cost, std::vector<char>& visited, const std::vector<double>& h) {
    if (u == goal) {
      best = std::min(best, cost);
      return;
    }
    visited[static_cast<std::size_t>(u)] = 1;
    for (const auto& [v, w] : ordered[static_cast<std::size_t>(u)]) {
      if (visited[static_cast<std::size_t>(v)]) continue;
      if (cost + w + h[static_cast<std::size_t>(v)] >= best) continue;
      dfs(ordered, v, goal, cost + w, visited, h);
    }
    visited[static_cast<std::size_t>(u)] = 0;
  }

  double min_cost(EdgeRef s, EdgeRef t) {
    best = std::numeric_limits<double>::infinity();
    const int sn = node_of(s);
    const int tn = node_of(t);
    const std::vector<double> h = to_goal(tn);
    // most promising successors first so the first complete descent is
    // already minimal and the rest prunes away
    std::vector<std::vector<std::pair<int, double>>> ordered = adj;
    for (auto& row : ordered)
      std::sort(row.begin(), row.end(), [&h](const auto& a, const auto& b) {
        return a.second + h[static_cast<std::size_t>(a.first)] <
               b.second + h[static_cast<std::size_t>(b.first)];
      });
    std::vector<char> visited(adj.size(), 0);
    dfs(ordered, sn, tn, 0.0, visited, h);
    return best;
  }
};

PatternMap random_map(const GridSpec& grid, Rng& rng, int records, double now) {
  PatternMap map;
  double t = 0.0;
  for (int i = 0; i < records; ++i) {
    t = std::min(now, t + static_cast<double>(rng.below(3)));
    const CellCoord cell = grid.cells()[rng.below(grid.cell_count())];
    map.record_traversal({cell, static_cast<int>(rng.below(6)) + 1,
                          static_cast<int>(rng.below(6)) + 1, t});
  }
  return map;
}

}  // namespace

TEST_CASE("edge graph node and arc structure on the radius-1 grid") {
  const GridSpec g = build_grid(1, 2.5);
  const PatternMap map;
  const EdgeGraph graph = build_edge_graph(g, map, {0.0}, 0.0);
  CHECK(graph.node_count() == 42);

  // interior physical edges by enumeration: (6*7 - 18) / 2 = 12, each
  // contributing a zero arc in both directions
  int zero_cross_arcs = 0;
  for (int u = 0; u < graph.node_count(); ++u) {
    for (int k = graph.offsets[static_cast<std::size_t>(u)];
         k < graph.offsets[static_cast<std::size_t>(u) + 1]; ++k) {
      const int v = graph.targets[static_cast<std::size_t>(k)];
      if (u / 6 != v / 6) {
        CHECK(graph.weights[static_cast<std::size_t>(k)] == 0.0);
        ++zero_cross_arcs;
      }
    }
  }
  CHECK(zero_cross_arcs == 2 * 12);
}

TEST_CASE("an empty map prices every within-cell arc at distance plus one") {
  const GridSpec g = build_grid(2, 2.5);
  const PatternMap map;
  const EdgeGraph graph = build_edge_graph(g, map, {6.0}, 0.0);
  const CostMatrix u = unimpeded_cost_matrix(g, {0, 0});
  for (int n = 0; n < graph.node_count(); ++n) {
    for (int k = graph.offsets[static_cast<std::size_t>(n)];
         k < graph.offsets[static_cast<std::size_t>(n) + 1]; ++k) {
      const int v = graph.targets[static_cast<std::size_t>(k)];
      if (n / 6 != v / 6) continue;
      const double w = graph.weights[static_cast<std::size_t>(k)];
      CHECK(w == Catch::Approx(u(n % 6 + 1, v % 6 + 1) + 1.0).margin(1e-12));
      CHECK(w > 0.0);
    }
  }
}

TEST_CASE("arc weights are clamped exactly when attraction beats distance plus one") {
  const GridSpec g = build_grid(1, 2.5);
  PatternMap map;
  map.record_traversal({{0, 0}, 2, 5, 0.0});  // single pair owns the full share
  const double kt = 6.0;
  const EdgeGraph graph = build_edge_graph(g, map, {kt}, 10.0);
  const CostMatrix u = unimpeded_cost_matrix(g, {0, 0});
  const int base = static_cast<int>(g.cell_index({0, 0})) * 6;
  for (int k = graph.offsets[static_cast<std::size_t>(base + 1)];
       k < graph.offsets[static_cast<std::size_t>(base + 2)]; ++k) {
    const int v = graph.targets[static_cast<std::size_t>(k)];
    if (v == base + 4) {
      // share = 1: raw cost u(2,5) + 1 - 6 = -0.67, clamped
      CHECK(1.0 + u(2, 5) < kt);
      CHECK(graph.weights[static_cast<std::size_t>(k)] == 0.0);
    }
  }
  // all weights admissible for Dijkstra
  for (double w : graph.weights) CHECK(w >= 0.0);
}

TEST_CASE("trivial query returns the start node at zero cost") {
  const GridSpec g = build_grid(1, 2.5);
  const EdgeGraph graph = build_edge_graph(g, PatternMap{}, {0.0}, 0.0);
  const EdgeRef start{{1, 0}, 2};
  const PlannedPath p = least_cost_path(graph, start, start);
  REQUIRE(p.nodes.size() == 1);
  CHECK(p.nodes.front() == start);
  CHECK(p.total_cost == 0.0);
}

TEST_CASE("Dijkstra equals exhaustive enumeration on small grids") {
  Rng rng(2024);
  for (int radius : {1, 2}) {
    const GridSpec g = build_grid(radius, 2.5);
    const std::vector<EdgeRef> boundary = boundary_edges(g);
    for (int fixture = 0; fixture < 8; ++fixture) {
      const double now = 50.0;
      const PatternMap map = random_map(g, rng, 40, now);
      for (double kt : {0.0, 3.0, 6.0}) {
        const EdgeGraph graph = build_edge_graph(g, map, {kt}, now);
        BruteForce oracle(g, map, kt, now);
        const EdgeRef s = boundary[rng.below(boundary.size())];
        EdgeRef t = boundary[rng.below(boundary.size())];
        if (t == s) t = boundary[(g.cell_index(t.cell) + 3) % boundary.size()];
        const PlannedPath p = least_cost_path(graph, s, t);
        CHECK(p.total_cost == Catch::Approx(oracle.min_cost(s, t)).margin(1e-9));
      }
    }
  }
}

TEST_CASE("planned paths walk existing arcs from start to goal") {
  Rng rng(99);
  const GridSpec g = build_grid(2, 2.5);
  const PatternMap map = random_map(g, rng, 60, 100.0);
  const EdgeGraph graph = build_edge_graph(g, map, {6.0}, 100.0);
  const std::vector<EdgeRef> boundary = boundary_edges(g);
  for (int trial = 0; trial < 10; ++trial) {
    const EdgeRef s = boundary[rng.below(boundary.size())];
    const EdgeRef t = boundary[rng.below(boundary.size())];
    const PlannedPath p = least_cost_path(graph, s, t);
    REQUIRE(!p.nodes.empty());
    CHECK(p.nodes.front() == s);
    CHECK(p.nodes.back() == t);
    double recomputed = 0.0;
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      const int u = graph.node_of(p.nodes[i]);
      const int v = graph.node_of(p.nodes[i + 1]);
      bool arc_found = false;
      for (int k = graph.offsets[static_cast<std::size_t>(u)];
           k < graph.offsets[static_cast<std::size_t>(u) + 1]; ++k) {
        if (graph.targets[static_cast<std::size_t>(k)] == v) {
          arc_found = true;
          recomputed += graph.weights[static_cast<std::size_t>(k)];
          break;
        }
      }
      CHECK(arc_found);
    }
    CHECK(recomputed == Catch::Approx(p.total_cost).margin(1e-9));
  }
}

TEST_CASE("a trafficked corridor gets cheaper as the gain rises") {
  const GridSpec g = build_grid(2, 2.5);
  PatternMap map;
  // straight west-to-east corridor through the middle row
  double t = 0.0;
  for (int pass = 0; pass < 10; ++pass) {
    for (int q = -2; q <= 2; ++q) {
      map.record_traversal({{q, 0}, 5, 2, t});
      t += 1.0;
    }
  }
  const EdgeRef start{{-2, 0}, 5};
  const EdgeRef goal{{2, 0}, 2};
  const EdgeGraph g0 = build_edge_graph(g, map, {0.0}, t);
  const EdgeGraph g6 = build_edge_graph(g, map, {6.0}, t);
  const PlannedPath p0 = least_cost_path(g0, start, goal);
  const PlannedPath p6 = least_cost_path(g6, start, goal);
  CHECK(p6.total_cost < p0.total_cost);
  BruteForce oracle(g, map, 6.0, t);
  CHECK(p6.total_cost == Catch::Approx(oracle.min_cost(start, goal)).margin(1e-9));
  // the discounted plan still runs straight down the corridor
  for (const EdgeRef& n : p6.nodes) CHECK(n.cell.r == 0);
}

TEST_CASE("identical inputs give identical paths") {
  Rng rng(5);
  const GridSpec g = build_grid(2, 2.5);
  const PatternMap map = random_map(g, rng, 80, 100.0);
  const EdgeGraph a = build_edge_graph(g, map, {3.0}, 100.0);
  const EdgeGraph b = build_edge_graph(g, map, {3.0}, 100.0);
  const EdgeRef s{{-2, 0}, 5};
  const EdgeRef t{{2, 0}, 2};
  const PlannedPath pa = least_cost_path(a, s, t);
  const PlannedPath pb = least_cost_path(b, s, t);
  REQUIRE(pa.nodes.size() == pb.nodes.size());
  for (std::size_t i = 0; i < pa.nodes.size(); ++i) CHECK(pa.nodes[i] == pb.nodes[i]);
}

TEST_CASE("disabling a crossing steers the plan elsewhere") {
  const GridSpec g = build_grid(1, 2.5);
  const PatternMap map;
  EdgeGraph graph = build_edge_graph(g, map, {0.0}, 0.0);
  const EdgeRef start{{1, 0}, 5};   // west edge of the east ring cell
  const EdgeRef goal{{-1, 0}, 5};   // boundary edge across the grid
  const PlannedPath direct = least_cost_path(graph, start, goal);
  REQUIRE(direct.nodes.size() >= 2);
  CHECK(direct.nodes[1].cell == CellCoord{0, 0});
  graph.disable_arc(start, {{0, 0}, 2});
  const PlannedPath detour = least_cost_path(graph, start, goal);
  CHECK(detour.total_cost > direct.total_cost);
  REQUIRE(detour.nodes.size() >= 2);
  CHECK_FALSE(detour.nodes[1].cell == CellCoord{0, 0});
}
