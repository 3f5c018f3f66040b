#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hexflow/entropy.hpp"
#include "hexflow/rng.hpp"

using namespace hexflow;

TEST_CASE("empty and single-pair cells carry no entropy") {
  TrafficMatrix t;
  CHECK(cell_entropy(t) == 0.0);
  t(2, 5) = 1;
  CHECK(cell_entropy(t) == 0.0);
  t(2, 5) = 17;
  CHECK(cell_entropy(t) == 0.0);
}

TEST_CASE("two equally used pairs give log two") {
  TrafficMatrix t;
  t(2, 5) = 3;
  t(4, 1) = 3;
  CHECK(cell_entropy(t) == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(cell_entropy(t, 2.0) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("entropy matches a direct recomputation on random matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    TrafficMatrix t;
    for (auto& x : t.v)
      x = rng.below(4) == 0 ? static_cast<std::int64_t>(rng.below(20)) : 0;
    const double s = static_cast<double>(t.grand_sum());
    double expected = 0.0;
    if (s > 0) {
      for (const auto& x : t.v)
        if (x > 0) expected -= (static_cast<double>(x) / s) * std::log(static_cast<double>(x) / s);
    }
    CHECK(cell_entropy(t) == Catch::Approx(expected).margin(1e-12));
    CHECK(cell_entropy(t) >= 0.0);
    CHECK(cell_entropy(t) <= std::log(36.0) + 1e-12);
  }
}

TEST_CASE("support size counts distinct pairs") {
  TrafficMatrix t;
  CHECK(support_size(t) == 0);
  t(1, 1) = 5;
  t(2, 5) = 1;
  CHECK(support_size(t) == 2);
}

TEST_CASE("airspace entropy sums the cumulative per-cell values") {
  const GridSpec g = build_grid(2, 2.5);
  PatternMap map(100.0);  // window must not affect entropy
  CHECK(airspace_entropy(map, g, 0.0) == 0.0);

  map.record_traversal({{0, 0}, 2, 5, 10.0});
  map.record_traversal({{0, 0}, 4, 1, 20.0});
  CHECK(airspace_entropy(map, g, 20.0) == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(airspace_support(map, g, 20.0) == 2);

  // far outside the discount window, the cumulative view still counts both
  CHECK(airspace_entropy(map, g, 5000.0) == Catch::Approx(std::log(2.0)).margin(1e-12));

  map.record_traversal({{1, 0}, 3, 6, 30.0});
  map.record_traversal({{1, 0}, 6, 3, 40.0});
  CHECK(airspace_entropy(map, g, 40.0) == Catch::Approx(2.0 * std::log(2.0)).margin(1e-12));
  CHECK(airspace_support(map, g, 40.0) == 4);
}
