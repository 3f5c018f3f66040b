#pragma once

// Cell transit costs: a traffic term that makes heavily used edge pairs
// cheaper, summed with the distance-based unimpeded term.

#include <stdexcept>

#include "hexflow/geometry.hpp"

namespace hexflow {

// Traffic-following gain. 0 ignores traffic entirely.
struct FollowingGain {
  double kt = 0.0;
};

inline constexpr double kDefaultGainCeiling = 6.024;

// Per-pair traffic cost 1 - kt * t[i][j] / sum(t). An empty cell has no
// traffic to attract anyone, so every pair costs the neutral 1.
inline CostMatrix traffic_cost(const TrafficMatrix& t, FollowingGain gain) {
  if (gain.kt < 0.0) throw std::invalid_argument("traffic-following gain must be >= 0");
  CostMatrix c;
  const double s = static_cast<double>(t.grand_sum());
  for (EdgeIndex i = 1; i <= 6; ++i)
    for (EdgeIndex j = 1; j <= 6; ++j)
      c(i, j) = s > 0.0 ? 1.0 - gain.kt * static_cast<double>(t(i, j)) / s : 1.0;
  return c;
}

// Total transit cost: unimpeded distances plus the (optionally scaled)
// traffic term. Entries can go negative at high gain; the planner clamps.
inline CostMatrix total_cost(const CostMatrix& u, const TrafficMatrix& t, FollowingGain gain,
                             double traffic_scale = 1.0) {
  CostMatrix c = traffic_cost(t, gain);
  for (EdgeIndex i = 1; i <= 6; ++i)
    for (EdgeIndex j = 1; j <= 6; ++j) c(i, j) = u(i, j) + traffic_scale * c(i, j);
  return c;
}

}  // namespace hexflow
