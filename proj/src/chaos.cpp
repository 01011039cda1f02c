#include "eulab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "eulab/rng.hpp"

namespace eulab {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double binomial_count(int q, int slots) {
  // C(q + slots - 1, slots - 1), as double to avoid overflow in the guard
  double c = 1.0;
  for (int i = 1; i < slots; ++i) c *= static_cast<double>(q + i) / i;
  return c;
}

void partitions_rec(int q, int slot, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (slot + 1 == static_cast<int>(cur.size())) {
    cur[slot] = q;
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= q; ++v) {
    cur[slot] = v;
    partitions_rec(q - v, slot + 1, cur, out);
  }
}

// Symmetric matrix assembled from the value-and-Hessian vector w (value
// first, then upper-triangle pairs); returns det of the Hessian part.
double hessian_det(const Eigen::VectorXd& w, int n) {
  switch (n) {
    case 1:
      return w[1];
    case 2:
      return w[1] * w[3] - w[2] * w[2];
    default: {
      const double a = w[1], b = w[2], c = w[3], d = w[4], e = w[5], f = w[6];
      // [[a, b, c], [b, d, e], [c, e, f]]
      return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
    }
  }
}

struct D2Table {
  std::vector<MultiIndex> index;  // hdim slots, |b| <= n + 1
  std::vector<double> value;
};

double d2_quadrature(const ChaosBasis& basis, const int* b, int hdim, int order) {
  const GaussHermiteRule rule = gauss_hermite_rule(order);

  // Per-slot Hermite values at the nodes.
  std::vector<std::vector<double>> herm(hdim);
  for (int s = 0; s < hdim; ++s) {
    herm[s].resize(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      herm[s][i] = hermite_eval(b[s], rule.nodes[i]);
    }
  }

  std::vector<int> digit(hdim, 0);
  Eigen::VectorXd u(hdim), w(hdim);
  double acc = 0.0;
  const int G = static_cast<int>(rule.nodes.size());
  while (true) {
    double weight = 1.0;
    for (int s = 0; s < hdim; ++s) {
      u[s] = rule.nodes[digit[s]];
      weight *= rule.weights[digit[s]] * herm[s][digit[s]];
    }
    w.noalias() = basis.blocks.sqrt2 * u;
    acc += weight * hessian_det(w, basis.n) * w[0];

    int s = hdim - 1;
    while (s >= 0 && ++digit[s] == G) digit[s--] = 0;
    if (s < 0) break;
  }

  double bfac = 1.0;
  for (int s = 0; s < hdim; ++s)
    for (int v = 2; v <= b[s]; ++v) bfac *= v;
  return acc / bfac;
}

D2Table build_d2_table(const ChaosBasis& basis, int max_total) {
  D2Table table;
  const int cap = std::min(max_total, basis.n + 1);  // integrand degree bound
  for (int total = 0; total <= cap; ++total) {
    const int order = required_quadrature_order(basis, total);
    for (const MultiIndex& b : enumerate_partitions(total, basis.hdim)) {
      table.index.push_back(b);
      table.value.push_back(d2_quadrature(basis, b.data(), basis.hdim, order));
    }
  }
  return table;
}

double d1_closed_form(const ChaosBasis& basis, const int* g) {
  double prod = 1.0;
  for (int i = 0; i < basis.n; ++i) {
    if (g[i] % 2 != 0) return 0.0;
    double fac = 1.0;
    for (int v = 2; v <= g[i]; ++v) fac *= v;
    prod *= hermite_at_zero(g[i]) / fac;
  }
  const double det1 = basis.blocks.lambda1.determinant();
  return prod * std::pow(det1, -0.5) * std::pow(kTwoPi, -0.5 * basis.n);
}

// Nonzero chaos coefficients of one order: gradient part with even entries,
// value-and-Hessian part from the finite d2 table.
struct CoefficientSet {
  std::vector<MultiIndex> index;  // full nvec-slot indices
  std::vector<double> d;
};

CoefficientSet nonzero_coefficients(const ChaosBasis& basis, const D2Table& table, int q) {
  CoefficientSet set;
  for (std::size_t bi = 0; bi < table.index.size(); ++bi) {
    if (table.value[bi] == 0.0) continue;
    const int btot = multiindex_order(table.index[bi]);
    const int gtot = q - btot;
    if (gtot < 0 || gtot % 2 != 0) continue;
    for (const MultiIndex& g : enumerate_partitions(gtot, basis.n)) {
      bool even = true;
      for (int v : g)
        if (v % 2 != 0) even = false;
      if (!even) continue;
      const double d1 = d1_closed_form(basis, g.data());
      if (d1 == 0.0) continue;
      MultiIndex full(basis.nvec);
      std::copy(g.begin(), g.end(), full.begin());
      std::copy(table.index[bi].begin(), table.index[bi].end(), full.begin() + basis.n);
      set.index.push_back(std::move(full));
      set.d.push_back(d1 * table.value[bi]);
    }
  }
  return set;
}

// Flattened transport expansion of sum_{a,b} w_ab E[H_a(Y_0) H_b(Y_nu)]:
// each term is a product of K-entry powers with a scalar weight.
struct TransportTerms {
  std::vector<double> weight;
  std::vector<std::int32_t> cells;   // packed (cell_index << 6) | exponent
  std::vector<std::int32_t> offset;  // term t covers cells [offset[t], offset[t+1])
};

void enumerate_transport(const MultiIndex& a, const MultiIndex& b, double pair_weight,
                         int nvec, TransportTerms& out, std::int64_t cap) {
  std::vector<int> rows, cols;
  for (int i = 0; i < nvec; ++i)
    if (a[i] > 0) rows.push_back(i);
  for (int j = 0; j < nvec; ++j)
    if (b[j] > 0) cols.push_back(j);

  std::vector<int> colrem;
  for (int j : cols) colrem.push_back(b[j]);

  std::vector<std::int32_t> stack;
  const double afac = multiindex_factorial(a);
  const double bfac = multiindex_factorial(b);

  std::function<void(std::size_t, std::size_t, int, double)> rec =
      [&](std::size_t ri, std::size_t ci, int rowrem, double invfac) {
        if (ri == rows.size()) {
          if (static_cast<std::int64_t>(out.weight.size()) >=
              static_cast<std::int64_t>(cap)) {
            throw NumericsError(
                "transport enumeration exceeds the configured cap; lower the chaos "
                "order or raise VarianceOptions::transport_cap");
          }
          out.weight.push_back(pair_weight * afac * bfac * invfac);
          out.cells.insert(out.cells.end(), stack.begin(), stack.end());
          out.offset.push_back(static_cast<std::int32_t>(out.cells.size()));
          return;
        }
        if (ci == cols.size()) {
          if (rowrem == 0) rec(ri + 1, 0, ri + 1 < rows.size() ? a[rows[ri + 1]] : 0, invfac);
          return;
        }
        // Remaining columns must be able to absorb the remaining row mass.
        int capacity = 0;
        for (std::size_t j = ci; j < cols.size(); ++j) capacity += colrem[j];
        if (capacity < rowrem) return;

        const int lim = std::min(rowrem, colrem[ci]);
        for (int m = 0; m <= lim; ++m) {
          double inv = invfac;
          for (int v = 2; v <= m; ++v) inv /= v;
          if (m > 0) {
            stack.push_back(static_cast<std::int32_t>(
                ((rows[ri] * nvec + cols[ci]) << 6) | m));
            colrem[ci] -= m;
            rec(ri, ci + 1, rowrem - m, inv);
            colrem[ci] += m;
            stack.pop_back();
          } else {
            rec(ri, ci + 1, rowrem, inv);
          }
        }
      };

  rec(0, 0, rows.empty() ? 0 : a[rows[0]], 1.0);
}

double evaluate_transport(const TransportTerms& terms, const std::vector<double>& powers,
                          int max_exp) {
  double acc = 0.0;
  std::size_t begin = 0;
  for (std::size_t t = 0; t < terms.weight.size(); ++t) {
    const std::size_t end = terms.offset[t];
    double prod = terms.weight[t];
    for (std::size_t c = begin; c < end; ++c) {
      const std::int32_t packed = terms.cells[c];
      prod *= powers[(packed >> 6) * (max_exp + 1) + (packed & 63)];
    }
    acc += prod;
    begin = end;
  }
  return acc;
}

// Composite 8-point Gauss-Legendre panels; doubling the panel count until the
// relative change is inside tol (at most `max_refine` doublings).
const double kGL8Nodes[8] = {-0.9602898564975363, -0.7966664774136267,
                             -0.5255324099163290, -0.1834346424956498,
                             0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
const double kGL8Weights[8] = {0.1012285362903763, 0.2223810344533745,
                               0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};

double panel_integrate(const std::function<double(double)>& f, double a, double b,
                       int panels) {
  const double width = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (int i = 0; i < 8; ++i) {
      acc += kGL8Weights[i] * f(mid + 0.5 * width * kGL8Nodes[i]);
    }
  }
  return acc * 0.5 * width;
}

double refine_integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int base_panels) {
  double prev = panel_integrate(f, a, b, base_panels);
  for (int r = 1; r <= 3; ++r) {
    const double cur = panel_integrate(f, a, b, base_panels << r);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace

double multiindex_factorial(const MultiIndex& a) {
  double f = 1.0;
  for (int v : a)
    for (int i = 2; i <= v; ++i) f *= i;
  return f;
}

std::vector<MultiIndex> enumerate_partitions(int q, int slots, std::int64_t cap) {
  if (q < 0 || slots < 1) throw ConfigError("enumerate_partitions: bad arguments");
  if (binomial_count(q, slots) > static_cast<double>(cap)) {
    std::ostringstream os;
    os << "enumerate_partitions: " << binomial_count(q, slots)
       << " multi-indices exceed the cap " << cap;
    throw NumericsError(os.str());
  }
  std::vector<MultiIndex> out;
  MultiIndex cur(slots, 0);
  partitions_rec(q, 0, cur, out);
  return out;
}

GaussHermiteRule gauss_hermite_rule(int order) {
  if (order < 1 || order > 128) throw ConfigError("gauss_hermite_rule: order out of range");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double off = std::sqrt(static_cast<double>(k));
    jac(k, k - 1) = off;
    jac(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

ChaosBasis make_chaos_basis(const CovarianceModel& model) {
  ChaosBasis basis;
  basis.model = &model;
  basis.blocks = lambda_blocks(model);
  basis.n = model.dim();
  basis.nvec = field_vector_size(basis.n);
  basis.hdim = basis.nvec - basis.n;
  return basis;
}

int required_quadrature_order(const ChaosBasis& basis, int q) {
  // Integrand degree per axis is at most (hdim + 1) + q; exactness needs
  // 2 order - 1 at least that.
  return (basis.hdim + 1 + q) / 2 + 1 + ((basis.hdim + 1 + q) % 2);
}

ChaosCoefficient chaos_coefficient(const ChaosBasis& basis, const MultiIndex& a,
                                   int quad_order) {
  if (static_cast<int>(a.size()) != basis.nvec) {
    throw ConfigError("chaos_coefficient: multi-index must have the field vector size");
  }
  for (int v : a)
    if (v < 0) throw ConfigError("chaos_coefficient: negative multi-index entry");

  const int q = multiindex_order(a);
  const int needed = required_quadrature_order(basis, q);
  if (quad_order == 0) {
    quad_order = needed;
  } else if (quad_order < needed) {
    std::ostringstream os;
    os << "chaos_coefficient: quadrature order " << quad_order
       << " is below the exactness threshold; order " << needed << " is required";
    throw NumericsError(os.str());
  }

  ChaosCoefficient out;
  out.index = a;
  out.d1 = d1_closed_form(basis, a.data());
  out.d2 = d2_quadrature(basis, a.data() + basis.n, basis.hdim, quad_order);
  out.d = out.d1 * out.d2;
  return out;
}

double mehler_expectation(const MultiIndex& a, const MultiIndex& b,
                          const Eigen::MatrixXd& K) {
  const int N = static_cast<int>(a.size());
  if (static_cast<int>(b.size()) != N || K.rows() != N || K.cols() != N) {
    throw ConfigError("mehler_expectation: dimension mismatch");
  }
  if (multiindex_order(a) != multiindex_order(b)) return 0.0;

  TransportTerms terms;
  enumerate_transport(a, b, 1.0, N, terms, 10'000'000);

  const int max_exp = multiindex_order(a);
  std::vector<double> powers(static_cast<std::size_t>(N) * N * (max_exp + 1));
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      double p = 1.0;
      for (int e = 0; e <= max_exp; ++e) {
        powers[(i * N + j) * (max_exp + 1) + e] = p;
        p *= K(i, j);
      }
    }
  }
  return evaluate_transport(terms, powers, max_exp);
}

double coefficient_square_sum(const ChaosBasis& basis, int q) {
  const D2Table table = build_d2_table(basis, q);
  const CoefficientSet set = nonzero_coefficients(basis, table, q);
  double s = 0.0;
  for (std::size_t i = 0; i < set.index.size(); ++i) {
    s += set.d[i] * set.d[i] * multiindex_factorial(set.index[i]);
  }
  return s;
}

VarianceSeries truncated_variance(const ChaosBasis& basis, int max_order,
                                  const VarianceOptions& opts) {
  if (max_order < 1) throw ConfigError("truncated_variance: max_order must be positive");
  const CovarianceModel& model = *basis.model;
  const int n = basis.n;
  const double radius =
      opts.lag_radius > 0.0 ? opts.lag_radius : 8.0 * model.correlation_scale();

  const D2Table table = build_d2_table(basis, max_order);

  VarianceSeries series;
  series.lag_radius = radius;

  std::vector<double> nu(n, 0.0);
  const int max_exp = max_order;

  for (int q = 1; q <= max_order; ++q) {
    const CoefficientSet set = nonzero_coefficients(basis, table, q);

    TransportTerms terms;
    for (std::size_t ia = 0; ia < set.index.size(); ++ia) {
      for (std::size_t ib = 0; ib < set.index.size(); ++ib) {
        double w = set.d[ia] * set.d[ib];
        if (opts.placement == FactorialPlacement::kDuplicated) {
          w *= multiindex_factorial(set.index[ia]) * multiindex_factorial(set.index[ib]);
        }
        enumerate_transport(set.index[ia], set.index[ib], w, basis.nvec, terms,
                            opts.transport_cap);
      }
    }

    // Orders killed by parity leave only quadrature-rounding residue in the
    // coefficients; |u_q| is then bounded by the weight mass times the lag
    // volume, far below anything the series can resolve.  Skip the quadrature
    // so noise-level integrands do not chase refinement in vain.
    double weight_mass = 0.0;
    for (double w : terms.weight) weight_mass += std::abs(w);
    if (weight_mass < 1e-13) terms.weight.clear();

    std::vector<double> powers(static_cast<std::size_t>(basis.nvec) * basis.nvec *
                               (max_exp + 1));
    const auto integrand = [&](const std::vector<double>& point) {
      const Eigen::MatrixXd K = corr_matrix_K(model, point, basis.blocks);
      for (int i = 0; i < basis.nvec; ++i) {
        for (int j = 0; j < basis.nvec; ++j) {
          double p = 1.0;
          for (int e = 0; e <= max_exp; ++e) {
            powers[(i * basis.nvec + j) * (max_exp + 1) + e] = p;
            p *= K(i, j);
          }
        }
      }
      return evaluate_transport(terms, powers, max_exp);
    };

    // The pair moment is invariant under nu -> -nu, so axis 0 integrates
    // over [0, radius] and doubles.
    double u_q = 0.0;
    if (terms.weight.empty()) {
      u_q = 0.0;
    } else if (n == 1) {
      u_q = 2.0 * refine_integrate(
                      [&](double x) {
                        nu[0] = x;
                        return integrand(nu);
                      },
                      0.0, radius, opts.rel_tol, 16);
    } else if (n == 2) {
      u_q = 2.0 * refine_integrate(
                      [&](double x) {
                        return refine_integrate(
                            [&](double y) {
                              std::vector<double> pt{x, y};
                              return integrand(pt);
                            },
                            -radius, radius, opts.rel_tol * 0.1, 32);
                      },
                      0.0, radius, opts.rel_tol, 16);
    } else {
      u_q = 2.0 * refine_integrate(
                      [&](double x) {
                        return refine_integrate(
                            [&](double y) {
                              return refine_integrate(
                                  [&](double z) {
                                    std::vector<double> pt{x, y, z};
                                    return integrand(pt);
                                  },
                                  -radius, radius, opts.rel_tol * 0.01, 16);
                            },
                            -radius, radius, opts.rel_tol * 0.1, 16);
                      },
                      0.0, radius, opts.rel_tol, 8);
    }

    // Boundary decay: the integrand must be negligible at the truncation edge.
    if (!terms.weight.empty()) {
      std::fill(nu.begin(), nu.end(), 0.0);
      nu[0] = radius;
      const double edge = std::abs(integrand(nu));
      if (edge > 1e-10 * std::max(1.0, std::abs(u_q))) {
        std::ostringstream os;
        os << "truncated_variance: integrand at the lag boundary (" << edge
           << ") has not decayed; increase the lag radius beyond " << radius;
        throw NumericsError(os.str());
      }
    }

    series.u.push_back(u_q);
    series.total += u_q;
    series.partial.push_back(series.total);
  }

  // Heuristic tail diagnostic per order: S(q) times the shell integral of the
  // scaled psi envelope between radius and 2 radius.
  const double inv_norm_sq = 1.0 / basis.blocks.min_eigenvalue;
  const double c_k = static_cast<double>(n) * n * inv_norm_sq;
  for (int q = 1; q <= max_order; ++q) {
    const double sq = coefficient_square_sum(basis, q);
    double shell = 0.0;
    const int steps = 32;
    const double dx = radius / steps;
    std::vector<double> probe(n, 0.0);
    for (int i = 0; i < steps; ++i) {
      probe[0] = radius + (i + 0.5) * dx;
      const double kappa = std::min(1.0, c_k * eval_psi(model, probe));
      double ring = std::pow(2.0 * probe[0], n - 1) * 2.0 * n;  // cube-shell area
      shell += std::pow(kappa, q) * ring * dx;
    }
    series.tail.push_back(sq * shell);
  }
  return series;
}

MeanFactorization mean_euler_integral(const CovarianceModel& model, double m) {
  if (!model.isotropic()) {
    throw NumericsError("mean_euler_integral: closed form requires an isotropic model");
  }
  const int n = model.dim();
  std::vector<double> zero(n, 0.0);
  std::vector<int> ord(n, 0);
  ord[0] = 2;
  const double lambda2 = -eval_rho(model, zero, ord);
  if (lambda2 <= 0.0) throw DegeneracyError("mean_euler_integral: lambda_2 must be positive");

  MeanFactorization out;
  out.d1_edge = 1.0 / std::sqrt(lambda2 * kTwoPi);
  out.d2_edge = -lambda2;
  out.value = n * m * out.d1_edge * out.d2_edge;
  return out;
}

MomentCheck det_hessian_mean_check(const CovarianceModel& model, std::int64_t samples,
                                   std::uint64_t seed) {
  if (samples < 2) throw ConfigError("det_hessian_mean_check: need at least 2 samples");
  const ChaosBasis basis = make_chaos_basis(model);
  const NormalStream stream(seed, kStreamMonteCarlo);

  Eigen::VectorXd z(basis.hdim), w(basis.hdim);
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    for (int j = 0; j < basis.hdim; ++j) {
      z[j] = stream(static_cast<std::uint64_t>(i) * basis.hdim + j);
    }
    w.noalias() = basis.blocks.sqrt2 * z;
    const double v = hessian_det(w, basis.n) * w[0];
    sum += v;
    sum2 += v * v;
  }
  MomentCheck out;
  out.samples = samples;
  out.estimate = sum / samples;
  const double var = std::max(0.0, sum2 / samples - out.estimate * out.estimate);
  out.std_error = std::sqrt(var / samples);
  out.expected = basis.n == 1 ? -basis.blocks.lambda1(0, 0) : 0.0;
  return out;
}

}  // namespace eulab
