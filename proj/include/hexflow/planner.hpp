#pragma once

// Path planning over the edge graph: one node per (cell, edge), within-cell
// arcs priced by the total transit cost of the entry/exit pair, zero-cost
// arcs between the two views of each interior physical edge. Dijkstra with
// canonical tie-breaking keeps replans byte-reproducible.

#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "hexflow/cost_model.hpp"
#include "hexflow/geometry.hpp"
#include "hexflow/pattern_map.hpp"

namespace hexflow {

struct EdgeGraph {
  const GridSpec* grid = nullptr;
  // CSR adjacency; node id = cell_index * 6 + (edge - 1), which makes node
  // order the canonical (q, r, edge) order.
  std::vector<int> offsets;
  std::vector<int> targets;
  std::vector<double> weights;

  int node_count() const { return static_cast<int>(offsets.size()) - 1; }

  int node_of(EdgeRef e) const {
    return static_cast<int>(grid->cell_index(e.cell)) * 6 + (e.edge - 1);
  }

  EdgeRef edge_ref_of(int node) const {
    return {grid->cells()[static_cast<std::size_t>(node / 6)], node % 6 + 1};
  }

  // Removes one directed arc from planning (weight becomes +inf). Used to
  // steer a hold-expiry replan away from the crossing that stayed blocked.
  void disable_arc(EdgeRef from, EdgeRef to) {
    const int u = node_of(from);
    const int v = node_of(to);
    for (int k = offsets[static_cast<std::size_t>(u)]; k < offsets[static_cast<std::size_t>(u) + 1]; ++k)
      if (targets[static_cast<std::size_t>(k)] == v)
        weights[static_cast<std::size_t>(k)] = std::numeric_limits<double>::infinity();
  }
};

struct PlannedPath {
  std::vector<EdgeRef> nodes;
  double total_cost = 0.0;
};

// Weights reflect the traffic map as of `now` and the caller's gain; they
// are clamped at zero so Dijkstra's non-negativity precondition holds even
// when strong traffic attraction drives Eq-style totals negative.
// `u_by_cell`, when given, supplies per-cell unimpeded matrices (config
// overrides); otherwise the geometric matrix is shared by every cell.
inline EdgeGraph build_edge_graph(const GridSpec& grid, const PatternMap& map, FollowingGain gain,
                                  double now, const std::vector<CostMatrix>* u_by_cell = nullptr,
                                  double traffic_scale = 1.0) {
  EdgeGraph g;
  g.grid = &grid;
  const int n = static_cast<int>(grid.cell_count()) * 6;
  g.offsets.reserve(static_cast<std::size_t>(n) + 1);
  g.targets.reserve(static_cast<std::size_t>(n) * 6);
  g.weights.reserve(static_cast<std::size_t>(n) * 6);

  const CostMatrix shared_u = unimpeded_cost_matrix(grid, grid.cells().front());
  g.offsets.push_back(0);
  for (std::size_t ci = 0; ci < grid.cell_count(); ++ci) {
    const CellCoord cell = grid.cells()[ci];
    const CostMatrix& u = u_by_cell ? (*u_by_cell)[ci] : shared_u;
    const CostMatrix c = total_cost(u, map.windowed_matrix(cell, now), gain, traffic_scale);
    for (EdgeIndex i = 1; i <= 6; ++i) {
      for (EdgeIndex j = 1; j <= 6; ++j) {
        if (i == j) continue;  // U-turns are not planner moves
        g.targets.push_back(static_cast<int>(ci) * 6 + (j - 1));
        g.weights.push_back(std::max(0.0, c(i, j)));
      }
      if (auto partner = coincident_edge(grid, {cell, i})) {
        g.targets.push_back(g.node_of(*partner));
        g.weights.push_back(0.0);
      }
      g.offsets.push_back(static_cast<int>(g.targets.size()));
    }
  }
  return g;
}

// Least-cost path between two edges. Ties are broken toward the smaller
// canonical node so equal-cost alternatives replay identically.
inline PlannedPath least_cost_path(const EdgeGraph& g, EdgeRef start, EdgeRef goal) {
  const int s = g.node_of(start);
  const int t = g.node_of(goal);
  const int n = g.node_count();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> dist(static_cast<std::size_t>(n), inf);
  std::vector<int> pred(static_cast<std::size_t>(n), -1);
  std::vector<char> settled(static_cast<std::size_t>(n), 0);

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  dist[static_cast<std::size_t>(s)] = 0.0;
  queue.push({0.0, s});

  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    if (u == t) break;
    for (int k = g.offsets[static_cast<std::size_t>(u)]; k < g.offsets[static_cast<std::size_t>(u) + 1]; ++k) {
      const int v = g.targets[static_cast<std::size_t>(k)];
      if (settled[static_cast<std::size_t>(v)]) continue;
      const double nd = d + g.weights[static_cast<std::size_t>(k)];
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        pred[static_cast<std::size_t>(v)] = u;
        queue.push({nd, v});
      } else if (nd == dist[static_cast<std::size_t>(v)] && u < pred[static_cast<std::size_t>(v)]) {
        pred[static_cast<std::size_t>(v)] = u;
      }
    }
  }

  if (dist[static_cast<std::size_t>(t)] == inf) throw std::runtime_error("goal unreachable in edge graph");

  PlannedPath path;
  path.total_cost = dist[static_cast<std::size_t>(t)];
  for (int v = t; v != -1; v = pred[static_cast<std::size_t>(v)]) path.nodes.push_back(g.edge_ref_of(v));
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

}  // namespace hexflow
