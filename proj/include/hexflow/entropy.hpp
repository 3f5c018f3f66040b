#pragma once

// Shannon entropy of per-cell traversal distributions; airspace entropy is
// the sum over cells, always computed on the cumulative map.

#include <cmath>

#include "hexflow/geometry.hpp"
#include "hexflow/pattern_map.hpp"

namespace hexflow {

struct EntropySample {
  double time = 0.0;
  double total_entropy = 0.0;
};

// -sum p log p over the nonzero entries, natural log by default. A log base
// b is applied as a 1/ln(b) scale; 0*log 0 contributes nothing.
inline double cell_entropy(const TrafficMatrix& t, double log_base = 0.0) {
  const double s = static_cast<double>(t.grand_sum());
  if (s <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto& count : t.v) {
    if (count > 0) {
      const double p = static_cast<double>(count) / s;
      h -= p * std::log(p);
    }
  }
  if (log_base > 0.0) h /= std::log(log_base);
  return h;
}

// Number of distinct edge pairs ever used; non-decreasing over time.
inline int support_size(const TrafficMatrix& t) {
  int n = 0;
  for (const auto& count : t.v)
    if (count > 0) ++n;
  return n;
}

inline double airspace_entropy(const PatternMap& map, const GridSpec& grid, double now,
                               double log_base = 0.0) {
  double total = 0.0;
  for (CellCoord c : grid.cells()) total += cell_entropy(map.cumulative_matrix(c, now), log_base);
  return total;
}

inline int airspace_support(const PatternMap& map, const GridSpec& grid, double now) {
  int total = 0;
  for (CellCoord c : grid.cells()) total += support_size(map.cumulative_matrix(c, now));
  return total;
}

}  // namespace hexflow
