#pragma once

// Summary statistics and a one-sample Kolmogorov-Smirnov normality test.
// Reductions use pairwise summation so results depend only on element order,
// never on a thread schedule.

#include <cstdint>
#include <span>

namespace eulab {

double pairwise_sum(std::span<const double> values);

struct SummaryStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;         // unbiased
  double skewness = 0.0;         // m3 / m2^{3/2}
  double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;  // constant input: shape statistics undefined
};

// Requires at least 2 values.
SummaryStats summary_stats(std::span<const double> values);

double normal_cdf(double x);

// Inverse standard normal CDF for p in (0, 1); accurate to full double
// precision (Wichura's PPND16 rational approximations).
double normal_quantile(double p);

// Kolmogorov tail probability Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

struct KsResult {
  double statistic = 0.0;  // sup-distance between empirical and model CDF
  double p_value = 0.0;    // finite-sample approximation (Stephens)
  bool defined = false;    // false when sigma <= 0 or fewer than 2 values
};

// One-sample Kolmogorov-Smirnov test of `values` against N(mu, sigma^2).
KsResult ks_test_normal(std::span<const double> values, double mu, double sigma);

}  // namespace eulab
