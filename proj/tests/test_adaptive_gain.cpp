#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hexflow/adaptive_gain.hpp"

using namespace hexflow;

namespace {
const SigmoidParams kDefaults{};
}

TEST_CASE("density is zero with no other traffic") {
  const GridSpec g = build_grid(5, 2.5);
  CHECK(local_density({0, 0}, {}, {15.0}, g) == 0.0);
}

TEST_CASE("a range covering the grid divides by the grid area") {
  const GridSpec g = build_grid(5, 2.5);
  std::vector<Vec2> others(14, Vec2{1.0, 1.0});
  const double rho = local_density({0, 0}, others, {50.0}, g);
  CHECK(rho == Catch::Approx(14.0 / 1786.780821729195).margin(1e-9));
  CHECK(rho == Catch::Approx(0.007835).margin(1e-6));
}

TEST_CASE("a small range divides by its own circle") {
  const GridSpec g = build_grid(5, 2.5);
  std::vector<Vec2> others = {{5.0, 0.0}, {0.0, 10.0}, {-14.9, 0.0}, {20.0, 0.0}};
  const double rho = local_density({0, 0}, others, {15.0}, g);
  CHECK(rho == Catch::Approx(3.0 / (std::acos(-1.0) * 225.0)).margin(1e-12));
  CHECK(rho == Catch::Approx(0.004244).margin(1e-6));
}

TEST_CASE("membership at exactly the range boundary is inclusive") {
  const GridSpec g = build_grid(5, 2.5);
  std::vector<Vec2> others = {{15.0, 0.0}};
  CHECK(local_density({0, 0}, others, {15.0}, g) > 0.0);
  others = {{15.0000001, 0.0}};
  CHECK(local_density({0, 0}, others, {15.0}, g) == 0.0);
}

TEST_CASE("density is translation invariant") {
  const GridSpec g = build_grid(5, 2.5);
  std::vector<Vec2> others = {{3.0, 4.0}, {-8.0, 2.0}, {12.0, -1.0}};
  const double base = local_density({1.0, -2.0}, others, {10.0}, g);
  const Vec2 shift{7.5, -3.25};
  std::vector<Vec2> shifted;
  for (Vec2 p : others) shifted.push_back(p + shift);
  CHECK(local_density(Vec2{1.0, -2.0} + shift, shifted, {10.0}, g) ==
        Catch::Approx(base).margin(1e-15));
}

TEST_CASE("with a whole-grid range every aircraft senses the same density") {
  const GridSpec g = build_grid(5, 2.5);
  std::vector<Vec2> fleet = {{0.0, 0.0}, {10.0, 5.0}, {-12.0, 8.0}, {3.0, -20.0}};
  std::vector<double> rhos;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    std::vector<Vec2> others;
    for (std::size_t k = 0; k < fleet.size(); ++k)
      if (k != i) others.push_back(fleet[k]);
    rhos.push_back(local_density(fleet[i], others, {50.0}, g));
  }
  for (double rho : rhos) CHECK(rho == rhos.front());
}

TEST_CASE("sigmoid midpoint yields half the ceiling") {
  CHECK(kt_from_density(kDefaults.midpoint_density, kDefaults).kt ==
        Catch::Approx(3.012).margin(1e-9));
}

TEST_CASE("sigmoid stays inside its band and saturates at the ceiling") {
  CHECK(kt_from_density(0.0, kDefaults).kt == Catch::Approx(1.5193e-6).margin(1e-9));
  CHECK(kt_from_density(0.0, kDefaults).kt < 1e-5);
  CHECK(kt_from_density(1.0, kDefaults).kt == Catch::Approx(6.024).margin(1e-9));
  for (double rho = 0.0; rho <= 0.05; rho += 0.001) {
    const double kt = kt_from_density(rho, kDefaults).kt;
    CHECK(kt > 0.0);
    CHECK(kt <= 6.024);
  }
}

TEST_CASE("sigmoid is monotone in density") {
  // strictly increasing until double rounding saturates at the ceiling
  double prev = -1.0;
  for (double rho = 0.0; rho <= 0.012; rho += 0.0001) {
    const double kt = kt_from_density(rho, kDefaults).kt;
    CHECK(kt > prev);
    prev = kt;
  }
  for (double rho = 0.012; rho <= 0.05; rho += 0.0005) {
    const double kt = kt_from_density(rho, kDefaults).kt;
    CHECK(kt >= prev);
    prev = kt;
  }
}

TEST_CASE("invalid inputs are rejected") {
  const GridSpec g = build_grid(2, 2.5);
  CHECK_THROWS_AS(local_density({0, 0}, {}, {0.0}, g), std::invalid_argument);
  CHECK_THROWS_AS(kt_from_density(-0.1, kDefaults), std::invalid_argument);
  CHECK_THROWS_AS(kt_from_density(0.1, {0.0, 0.1, 0.1}), std::invalid_argument);
}
