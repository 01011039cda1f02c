#pragma once

// Hermite-chaos machinery for the limiting law of the normalized Euler
// integral: coefficients of the chaos expansion, product-Hermite moments of
// correlated Gaussian vectors, the truncated variance series with its lag
// integrals, and the closed-form mean.
//
// Multi-indices run over the whitened field vector in the fixed component
// order (grad X | X, Hess X): the first n slots are the gradient block, the
// remaining 1 + n(n+1)/2 slots are the value-and-Hessian block with the
// value first.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "eulab/covariance.hpp"
#include "eulab/hermite.hpp"

namespace eulab {

using MultiIndex = std::vector<int>;

inline int multiindex_order(const MultiIndex& a) {
  int q = 0;
  for (int v : a) q += v;
  return q;
}

double multiindex_factorial(const MultiIndex& a);

// All multi-indices with `slots` entries summing to q, lexicographic.
// Refuses when the count would exceed `cap`.
std::vector<MultiIndex> enumerate_partitions(int q, int slots,
                                             std::int64_t cap = 5'000'000);

// Gauss-Hermite rule for the standard normal weight (probabilists'
// convention): sum w_i g(x_i) = E[g(Z)] exactly for polynomials of degree
// <= 2 order - 1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite_rule(int order);

// Model-derived state shared by the coefficient and variance computations.
struct ChaosBasis {
  const CovarianceModel* model = nullptr;
  LambdaBlocks blocks;
  int n = 0;     // ambient dimension
  int nvec = 0;  // field vector size
  int hdim = 0;  // value-and-Hessian block size, nvec - n
};
ChaosBasis make_chaos_basis(const CovarianceModel& model);

struct ChaosCoefficient {
  MultiIndex index;
  double d1 = 0.0;  // gradient-block factor, closed form
  double d2 = 0.0;  // value-and-Hessian factor, Gauss-Hermite quadrature
  double d = 0.0;   // product
};

// Quadrature order that integrates the coefficient integrand exactly for
// total chaos order q.
int required_quadrature_order(const ChaosBasis& basis, int q);

// Chaos coefficient of the interior-face functional for multi-index a.
// quad_order 0 selects the exact order automatically; an explicit order
// below the exactness threshold refuses and names the required order.
ChaosCoefficient chaos_coefficient(const ChaosBasis& basis, const MultiIndex& a,
                                   int quad_order = 0);

// E[ prod_i He_{a_i}(U_i) * prod_j He_{b_j}(V_j) ] for jointly Gaussian
// vectors with independent standard components inside each vector and cross
// covariance K_ij = E[U_i V_j]; exact finite sum over transport matrices
// with row sums a and column sums b.
double mehler_expectation(const MultiIndex& a, const MultiIndex& b,
                          const Eigen::MatrixXd& K);

// S(q) = sum_{|a|=q} d_a^2 a!; the growth diagnostic behind the series'
// summability.
double coefficient_square_sum(const ChaosBasis& basis, int q);

enum class FactorialPlacement {
  kOnce,        // multi-index factorials appear once, inside the pair moment
  kDuplicated,  // additionally multiplied into the lag weight (comparison mode)
};

struct VarianceOptions {
  double lag_radius = 0.0;          // 0 = 8 * correlation scale
  double rel_tol = 1e-7;            // adaptive lag-quadrature tolerance per order
  FactorialPlacement placement = FactorialPlacement::kOnce;
  std::int64_t transport_cap = 20'000'000;  // transport-term enumeration guard
};

struct VarianceSeries {
  std::vector<double> u;        // u_q, q = 1..Q
  std::vector<double> partial;  // running sums
  std::vector<double> tail;     // heuristic tail diagnostic per order
  double total = 0.0;
  double lag_radius = 0.0;
};

// Truncated long-run variance sum_{q<=Q} u_q with
// u_q = sum_{|a|=|b|=q} d_a d_b int_{R^n} E[H_a(Y_0) H_b(Y_nu)] d nu,
// integrated over |nu|_inf <= lag_radius.  The integrand must have decayed
// below 1e-10 relative at the boundary, otherwise refuses.
VarianceSeries truncated_variance(const ChaosBasis& basis, int max_order,
                                  const VarianceOptions& opts = {});

struct MeanFactorization {
  double d1_edge = 0.0;  // edge-family gradient factor
  double d2_edge = 0.0;  // edge-family value-and-Hessian factor
  double value = 0.0;    // n * m * d1_edge * d2_edge
};

// Closed-form mean of the upper Euler integral over [0, m]^n:
// -sqrt(lambda_2) n m / sqrt(2 pi).  Only the edge families contribute;
// isotropic models only.
MeanFactorization mean_euler_integral(const CovarianceModel& model, double m);

struct MomentCheck {
  double estimate = 0.0;
  double std_error = 0.0;
  double expected = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo estimate of E[det(Hess X) * X] under the lag-0 joint law:
// -lambda_2 in dimension 1 and 0 in higher dimension.
MomentCheck det_hessian_mean_check(const CovarianceModel& model, std::int64_t samples,
                                   std::uint64_t seed);

}  // namespace eulab
