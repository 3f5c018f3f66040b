#pragma once

// Hexagonal airspace tiling: axial coordinates, edge numbering, adjacency,
// midpoint geometry and distance-based unimpeded transit costs.
//
// Conventions (used consistently by every other header):
//   - pointy-top hexagons, axial coordinates (q, r), x east / y north;
//   - cell center: x = sqrt(3)*L*(q + r/2), y = -1.5*L*r  (L = edge length);
//   - edges are numbered 1..6 starting at the upper-right edge and
//     proceeding clockwise, so edge k's midpoint sits at angle (2-k)*60
//     degrees from the cell center at apothem distance;
//   - the grid is a hex-of-hexes: every cell within `radius` rings of the
//     origin cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace hexflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

struct CellCoord {
  int q = 0;
  int r = 0;

  friend bool operator==(CellCoord a, CellCoord b) { return a.q == b.q && a.r == b.r; }
  friend bool operator!=(CellCoord a, CellCoord b) { return !(a == b); }
  friend bool operator<(CellCoord a, CellCoord b) {
    return a.q != b.q ? a.q < b.q : a.r < b.r;
  }
};

// Edge indices are plain ints restricted to [1, 6].
using EdgeIndex = int;

inline constexpr int kEdgesPerCell = 6;

inline bool is_valid_edge(EdgeIndex e) { return e >= 1 && e <= kEdgesPerCell; }

// Axial offset of the neighbor behind edge k (edge 1 = NE, clockwise).
inline CellCoord edge_direction(EdgeIndex e) {
  static constexpr std::array<CellCoord, 6> dirs = {{
      {+1, -1},  // 1: NE
      {+1, 0},   // 2: E
      {0, +1},   // 3: SE
      {-1, +1},  // 4: SW
      {-1, 0},   // 5: W
      {0, -1},   // 6: NW
  }};
  return dirs[static_cast<std::size_t>(e - 1)];
}

inline EdgeIndex opposite_edge(EdgeIndex e) { return (e + 2) % 6 + 1; }

struct EdgeRef {
  CellCoord cell;
  EdgeIndex edge = 1;

  friend bool operator==(EdgeRef a, EdgeRef b) { return a.cell == b.cell && a.edge == b.edge; }
  friend bool operator!=(EdgeRef a, EdgeRef b) { return !(a == b); }
  friend bool operator<(EdgeRef a, EdgeRef b) {
    if (a.cell != b.cell) return a.cell < b.cell;
    return a.edge < b.edge;
  }
};

inline int hex_distance(CellCoord a, CellCoord b) {
  const int dq = a.q - b.q;
  const int dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

namespace detail {

// Unit vectors toward edge midpoints; angle of edge k is (2-k)*60 degrees.
// Built from exact 0.5 / sqrt(3)/2 constants so that opposite directions
// negate each other bit-for-bit.
inline Vec2 edge_unit(EdgeIndex e) {
  const double h = std::sqrt(3.0) / 2.0;
  static const std::array<Vec2, 6> units = {{
      {0.5, h},    // 1: 60 deg
      {1.0, 0.0},  // 2: 0 deg
      {0.5, -h},   // 3: -60 deg
      {-0.5, -h},  // 4: -120 deg
      {-1.0, 0.0}, // 5: 180 deg
      {-0.5, h},   // 6: 120 deg
  }};
  return units[static_cast<std::size_t>(e - 1)];
}

// Vertices of a pointy-top hexagon at circumradius 1; vertex angles are
// 90 - 60*k degrees. Edge k spans vertices k-1 and k of this table.
inline Vec2 vertex_unit(int k) {
  const double h = std::sqrt(3.0) / 2.0;
  static const std::array<Vec2, 6> units = {{
      {0.0, 1.0},   // 90 deg
      {h, 0.5},     // 30 deg
      {h, -0.5},    // -30 deg
      {0.0, -1.0},  // -90 deg
      {-h, -0.5},   // -150 deg
      {-h, 0.5},    // 150 deg
  }};
  return units[static_cast<std::size_t>(((k % 6) + 6) % 6)];
}

inline std::uint64_t cell_key(CellCoord c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.r));
}

}  // namespace detail

// A 6x6 matrix addressed by 1-based edge indices.
template <typename T>
struct Mat6 {
  std::array<T, 36> v{};

  T& operator()(EdgeIndex i, EdgeIndex j) { return v[static_cast<std::size_t>((i - 1) * 6 + (j - 1))]; }
  const T& operator()(EdgeIndex i, EdgeIndex j) const {
    return v[static_cast<std::size_t>((i - 1) * 6 + (j - 1))];
  }

  T grand_sum() const {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }

  friend bool operator==(const Mat6& a, const Mat6& b) { return a.v == b.v; }
};

using TrafficMatrix = Mat6<std::int64_t>;
using CostMatrix = Mat6<double>;

// Hex-of-hexes grid around the origin cell. Immutable after construction.
class GridSpec {
 public:
  GridSpec(int radius, double cell_edge_length_mi)
      : radius_(radius), edge_len_(cell_edge_length_mi) {
    if (radius < 1) throw std::invalid_argument("grid radius must be >= 1");
    if (!(cell_edge_length_mi > 0.0)) throw std::invalid_argument("cell edge length must be > 0");
    for (int q = -radius; q <= radius; ++q) {
      for (int r = -radius; r <= radius; ++r) {
        CellCoord c{q, r};
        if (hex_distance(c, {0, 0}) <= radius) cells_.push_back(c);
      }
    }
    // q-major iteration above already yields canonical (q, r) order.
    for (std::size_t i = 0; i < cells_.size(); ++i) index_[detail::cell_key(cells_[i])] = i;

    // Diameter of the circle circumscribing the whole tiling: the farthest
    // points are the outer vertices of the six corner cells.
    const double reach2 = 3.0 * edge_len_ * edge_len_ * (radius_ + 0.5) * (radius_ + 0.5) +
                          edge_len_ * edge_len_ / 4.0;
    diameter_ = 2.0 * std::sqrt(reach2);
    area_ = std::acos(-1.0) * reach2;
  }

  int radius() const { return radius_; }
  double cell_edge_length() const { return edge_len_; }
  double apothem() const { return edge_len_ * std::sqrt(3.0) / 2.0; }
  std::size_t cell_count() const { return cells_.size(); }
  double grid_diameter() const { return diameter_; }
  double grid_area() const { return area_; }

  const std::vector<CellCoord>& cells() const { return cells_; }

  bool contains(CellCoord c) const { return index_.count(detail::cell_key(c)) != 0; }

  std::size_t cell_index(CellCoord c) const {
    auto it = index_.find(detail::cell_key(c));
    if (it == index_.end()) throw std::out_of_range("cell not in grid");
    return it->second;
  }

  CellCoord neighbor(CellCoord c, EdgeIndex e) const {
    const CellCoord d = edge_direction(e);
    return {c.q + d.q, c.r + d.r};
  }

  Vec2 cell_center(CellCoord c) const {
    return {std::sqrt(3.0) * edge_len_ * (c.q + c.r / 2.0), -1.5 * edge_len_ * c.r};
  }

 private:
  int radius_;
  double edge_len_;
  double diameter_ = 0.0;
  double area_ = 0.0;
  std::vector<CellCoord> cells_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

inline GridSpec build_grid(int radius, double cell_edge_length_mi) {
  return GridSpec(radius, cell_edge_length_mi);
}

// Same physical edge seen from the neighboring cell; absent on the boundary.
inline std::optional<EdgeRef> coincident_edge(const GridSpec& grid, EdgeRef e) {
  if (!grid.contains(e.cell)) throw std::out_of_range("cell not in grid");
  const CellCoord n = grid.neighbor(e.cell, e.edge);
  if (!grid.contains(n)) return std::nullopt;
  return EdgeRef{n, opposite_edge(e.edge)};
}

inline Vec2 edge_midpoint(const GridSpec& grid, EdgeRef e) {
  if (!grid.contains(e.cell)) throw std::out_of_range("cell not in grid");
  return grid.cell_center(e.cell) + grid.apothem() * detail::edge_unit(e.edge);
}

// Endpoints of the physical edge segment (cell vertices), for adjacency tests.
inline std::pair<Vec2, Vec2> edge_endpoints(const GridSpec& grid, EdgeRef e) {
  const Vec2 c = grid.cell_center(e.cell);
  const double L = grid.cell_edge_length();
  return {c + L * detail::vertex_unit(e.edge - 1), c + L * detail::vertex_unit(e.edge)};
}

// Distance between edge midpoints for distinct pairs; U-turns on the
// diagonal cost four cell edge lengths.
inline CostMatrix unimpeded_cost_matrix(const GridSpec& grid, CellCoord cell) {
  if (!grid.contains(cell)) throw std::out_of_range("cell not in grid");
  CostMatrix u;
  const double a = grid.apothem();
  for (EdgeIndex i = 1; i <= 6; ++i) {
    for (EdgeIndex j = 1; j <= 6; ++j) {
      if (i == j) {
        u(i, j) = 4.0 * grid.cell_edge_length();
      } else {
        u(i, j) = dist(a * detail::edge_unit(i), a * detail::edge_unit(j));
      }
    }
  }
  return u;
}

// All edges with no coincident partner, ordered by walking the perimeter
// counterclockwise from the smallest positive midpoint angle.
inline std::vector<EdgeRef> boundary_edges(const GridSpec& grid) {
  std::vector<std::pair<double, EdgeRef>> keyed;
  for (CellCoord c : grid.cells()) {
    for (EdgeIndex e = 1; e <= 6; ++e) {
      if (!grid.contains(grid.neighbor(c, e))) {
        const Vec2 m = edge_midpoint(grid, {c, e});
        double ang = std::atan2(m.y, m.x);
        if (ang < 0.0) ang += 2.0 * std::acos(-1.0);
        keyed.emplace_back(ang, EdgeRef{c, e});
      }
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<EdgeRef> out;
  out.reserve(keyed.size());
  for (const auto& [ang, e] : keyed) out.push_back(e);
  return out;
}

}  // namespace hexflow
