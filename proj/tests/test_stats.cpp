#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hexflow/rng.hpp"
#include "hexflow/stats.hpp"

using namespace hexflow;

namespace {

// Two-sided permutation test on the difference of means.
double permutation_p(std::vector<double> a, std::vector<double> b, Rng& rng, int iters) {
  const std::size_t na = a.size();
  const double observed = std::fabs(mean_and_variance(a).mean - mean_and_variance(b).mean);
  std::vector<double> pool = a;
  pool.insert(pool.end(), b.begin(), b.end());
  int at_least = 0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
    const std::span<const double> pa(pool.data(), na);
    const std::span<const double> pb(pool.data() + na, pool.size() - na);
    const double diff = std::fabs(mean_and_variance(pa).mean - mean_and_variance(pb).mean);
    if (diff >= observed - 1e-12) ++at_least;
  }
  return static_cast<double>(at_least) / iters;
}

}  // namespace

TEST_CASE("identical samples give a p-value of one") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
  const WelchResult r = welch_t_test(a, a);
  CHECK(r.t == 0.0);
  CHECK(r.p == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("clearly separated samples give a tiny p-value") {
  const std::vector<double> a = {0.0, 1e-9, 0.0, -1e-9, 0.0};
  const std::vector<double> b = {1.0, 1.0 + 1e-9, 1.0, 1.0 - 1e-9, 1.0};
  CHECK(welch_t_test(a, b).p < 1e-6);
}

TEST_CASE("degenerate samples are rejected") {
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(welch_t_test(flat, flat), std::invalid_argument);
  CHECK_THROWS_AS(welch_t_test(one, flat), std::invalid_argument);
}

TEST_CASE("welch p-values match reference fixtures") {
  // fixtures generated with scipy.stats.ttest_ind(equal_var=False)
  struct Fixture {
    std::vector<double> a, b;
    double t, p;
  };
  const std::vector<Fixture> fixtures = {
      {{1000.098, 1023.9, 978.069, 928.753, 963.626, 920.668, 1004.811, 1107.217, 960.623,
        950.362, 1039.187, 1028.551, 1008.433, 925.563, 997.66},
       {1043.436, 798.694, 905.086, 731.853, 805.255, 738.992, 931.789, 807.906, 992.552, 978.81,
        937.568, 657.989, 895.357, 954.18, 973.597},
       3.51680605587, 0.00225555605285173},
      {{917.589, 1001.78, 961.718, 975.293, 1124.872, 975.397, 1037.398, 1110.751, 993.312,
        1031.064, 1048.837, 1045.103, 941.996, 1046.091, 1148.706},
       {774.343, 1063.126, 974.322, 883.024, 1200.05, 1051.471, 816.085, 968.942, 1029.203,
        937.346, 1041.949, 952.018, 1040.07, 1132.623, 878.921},
       1.19546829174, 0.244320957868786},
      {{1096.251, 1042.935, 1090.181, 985.024, 1033.656, 1064.304, 1151.901, 1171.618, 974.118,
        1016.429, 1131.752, 920.606, 1042.946, 1072.217, 1180.561},
       {1042.728, 920.734, 915.771, 929.977, 1142.824, 908.637, 923.558, 1002.311, 945.508,
        936.326, 826.312, 958.617, 906.77, 1099.935, 1038.371},
       3.40706510526, 0.00202626500174416},
      {{1118.069, 1173.47, 1092.81, 1204.17, 1119.568, 1166.671, 1016.729, 1147.734, 984.944,
        957.174, 1095.642, 1048.006, 1133.124, 1299.581, 1053.462},
       {885.127, 984.648, 1019.162, 938.831, 935.288, 1044.296, 1022.389, 835.959, 950.498,
        964.234, 833.462, 991.181, 857.045, 1076.648, 983.13},
       5.10233125786, 2.25152457715675e-05},
  };
  for (const Fixture& f : fixtures) {
    const WelchResult r = welch_t_test(f.a, f.b);
    CHECK(r.t == Catch::Approx(f.t).margin(1e-9));
    CHECK(r.p == Catch::Approx(f.p).epsilon(1e-9));
  }
}

TEST_CASE("welch agrees with a permutation test on random samples") {
  Rng rng(314159);
  auto noise = [&rng](double center, double spread) {
    return center + spread * (static_cast<double>(rng.below(10000)) / 10000.0 - 0.5);
  };
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 15; ++i) {
      a.push_back(noise(100.0, 30.0));
      b.push_back(noise(100.0 + 8.0 * trial, 30.0));
    }
    const double welch = welch_t_test(a, b).p;
    const double permuted = permutation_p(a, b, rng, 4000);
    CHECK(std::fabs(welch - permuted) < 0.02);
  }
}

TEST_CASE("incomplete beta stays within bounds and hits known points") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x
  for (double x : {0.1, 0.25, 0.5, 0.9})
    CHECK(incomplete_beta(1.0, 1.0, x) == Catch::Approx(x).margin(1e-12));
  // I_x(1/2, 1/2) = (2/pi) asin(sqrt(x))
  for (double x : {0.2, 0.5, 0.8})
    CHECK(incomplete_beta(0.5, 0.5, x) ==
          Catch::Approx(2.0 / std::acos(-1.0) * std::asin(std::sqrt(x))).margin(1e-10));
}
