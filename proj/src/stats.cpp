#include "eulab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "eulab/errors.hpp"

namespace eulab {

namespace {

double pairwise_sum_range(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, count - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_range(values.data(), values.size());
}

SummaryStats summary_stats(std::span<const double> values) {
  const std::size_t count = values.size();
  if (count < 2) throw ConfigError("summary_stats: need at least 2 values");

  SummaryStats out;
  out.count = static_cast<std::int64_t>(count);
  out.mean = pairwise_sum(values) / static_cast<double>(count);
  out.min = *std::min_element(values.begin(), values.end());
  out.max = *std::max_element(values.begin(), values.end());

  std::vector<double> p2(count), p3(count), p4(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double d = values[i] - out.mean;
    p2[i] = d * d;
    p3[i] = p2[i] * d;
    p4[i] = p2[i] * p2[i];
  }
  const double m2 = pairwise_sum(p2) / count;
  const double m3 = pairwise_sum(p3) / count;
  const double m4 = pairwise_sum(p4) / count;

  out.variance = m2 * count / (count - 1.0);
  if (m2 <= 0.0) {
    out.degenerate = true;
    return out;
  }
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("normal_quantile: p must lie strictly inside (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

double kolmogorov_q(double t) {
  if (t <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 256; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-17) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

KsResult ks_test_normal(std::span<const double> values, double mu, double sigma) {
  KsResult out;
  if (values.size() < 2 || !(sigma > 0.0)) return out;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());

  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - mu) / sigma);
    d = std::max(d, f - static_cast<double>(i) / count);
    d = std::max(d, static_cast<double>(i + 1) / count - f);
  }
  out.statistic = d;
  const double root = std::sqrt(count);
  out.p_value = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
  out.defined = true;
  return out;
}

}  // namespace eulab
