#pragma once

// Sample statistics and Welch's unequal-variance t-test. The Student-t tail
// probability comes from the regularized incomplete beta function evaluated
// with a Lentz continued fraction.

#include <cmath>
#include <span>
#include <stdexcept>

namespace hexflow {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased sample variance
  std::size_t n = 0;
};

inline MeanVar mean_and_variance(std::span<const double> xs) {
  MeanVar mv;
  mv.n = xs.size();
  if (mv.n == 0) return mv;
  double sum = 0.0;
  for (double x : xs) sum += x;
  mv.mean = sum / static_cast<double>(mv.n);
  if (mv.n < 2) return mv;
  double ss = 0.0;
  for (double x : xs) ss += (x - mv.mean) * (x - mv.mean);
  mv.var = ss / static_cast<double>(mv.n - 1);
  return mv;
}

namespace detail {

inline double log_gamma(double x) { return std::lgamma(x); }

// Continued fraction for the incomplete beta function (Lentz's method).
inline double beta_cf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 3e-15;
  constexpr double fpmin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = detail::log_gamma(a + b) - detail::log_gamma(a) - detail::log_gamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's two-sample t-test with Welch-Satterthwaite degrees of freedom.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test needs at least two observations per sample");
  const MeanVar ma = mean_and_variance(a);
  const MeanVar mb = mean_and_variance(b);
  const double ga = ma.var / static_cast<double>(ma.n);
  const double gb = mb.var / static_cast<double>(mb.n);
  if (ga + gb <= 0.0)
    throw std::invalid_argument("welch_t_test needs nonzero variance in at least one sample");

  WelchResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(ga + gb);
  r.df = (ga + gb) * (ga + gb) /
         (ga * ga / static_cast<double>(ma.n - 1) + gb * gb / static_cast<double>(mb.n - 1));
  // Two-sided p from the t distribution: I_{df/(df+t^2)}(df/2, 1/2).
  r.p = incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  if (r.p > 1.0) r.p = 1.0;
  if (r.p < 0.0) r.p = 0.0;
  return r;
}

}  // namespace hexflow
