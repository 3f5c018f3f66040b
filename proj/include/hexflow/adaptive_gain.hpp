#pragma once

// Locally sensed traffic density and the sigmoid that maps it to the
// traffic-following gain.

#include <cmath>
#include <span>
#include <stdexcept>

#include "hexflow/cost_model.hpp"
#include "hexflow/geometry.hpp"

namespace hexflow {

struct SigmoidParams {
  double ceiling = kDefaultGainCeiling;     // gain as density -> infinity
  double midpoint_density = 0.0075965;      // aircraft per square mile at half-ceiling
  double slope_scale = 0.0005;              // aircraft per square mile per logistic unit
};

struct SensorRange {
  double rs_mi = 50.0;
};

// Aircraft within range divided by the sensed area; the area is clamped to
// the grid's circumscribing circle so a range wider than the airspace
// cannot dilute the density below the whole-grid value.
inline double local_density(Vec2 own_pos, std::span<const Vec2> others, SensorRange range,
                            const GridSpec& grid) {
  if (!(range.rs_mi > 0.0)) throw std::invalid_argument("sensor range must be > 0");
  std::size_t count = 0;
  for (const Vec2& p : others)
    if (dist(p, own_pos) <= range.rs_mi) ++count;
  const double circle = std::acos(-1.0) * range.rs_mi * range.rs_mi;
  const double area = std::min(circle, grid.grid_area());
  return static_cast<double>(count) / area;
}

// Increasing logistic in density, bounded by the ceiling.
inline FollowingGain kt_from_density(double density, const SigmoidParams& p) {
  if (density < 0.0) throw std::invalid_argument("density must be >= 0");
  if (!(p.ceiling > 0.0) || !(p.slope_scale > 0.0) || p.midpoint_density < 0.0)
    throw std::invalid_argument("invalid sigmoid parameters");
  return {p.ceiling / (1.0 + std::exp(-(density - p.midpoint_density) / p.slope_scale))};
}

}  // namespace hexflow
