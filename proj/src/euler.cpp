#include "eulab/euler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eulab {

namespace {

struct Cell {
  double value;
  std::int32_t parity;  // (-1)^dim
};

}  // namespace

std::int64_t EulerCurve::chi_leq_at(double u) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), u);
  if (it == breakpoints.begin()) return 0;
  return chi_leq[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

EulerCurve ec_curve(const FieldGrid& field) {
  const int n = field.spec.n;
  const int p = field.spec.p;
  const int slots = 2 * p - 1;  // even slot 2i: vertex i, odd slot 2i+1: edge (i, i+1)

  std::int64_t cell_count = 1;
  for (int d = 0; d < n; ++d) cell_count *= slots;

  std::int64_t stride[3] = {0, 0, 0};
  stride[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * p;

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(cell_count));

  std::array<int, 3> slot{0, 0, 0};
  for (std::int64_t c = 0; c < cell_count; ++c) {
    std::int64_t base = 0;
    int dim = 0;
    int edge_axes[3];
    for (int d = 0; d < n; ++d) {
      base += static_cast<std::int64_t>(slot[d] / 2) * stride[d];
      if (slot[d] % 2 != 0) edge_axes[dim++] = d;
    }
    double value = field.values[base];
    for (int mask = 1; mask < (1 << dim); ++mask) {
      std::int64_t off = 0;
      for (int b = 0; b < dim; ++b)
        if (mask & (1 << b)) off += stride[edge_axes[b]];
      value = std::max(value, field.values[base + off]);
    }
    cells.push_back({value, dim % 2 == 0 ? 1 : -1});
    for (int d = n - 1; d >= 0; --d) {
      if (++slot[d] < slots) break;
      slot[d] = 0;
    }
  }

  // Tie order (value, then dimension, then enumeration index) is fixed for
  // determinism; chi at each distinct value is independent of it.
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.parity > b.parity;
  });

  EulerCurve curve;
  std::int64_t chi = 0;
  std::size_t i = 0;
  while (i < cells.size()) {
    const double v = cells[i].value;
    while (i < cells.size() && cells[i].value == v) {
      chi += cells[i].parity;
      ++i;
    }
    curve.breakpoints.push_back(v);
    curve.chi_leq.push_back(chi);
  }
  curve.chi_total = chi;
  return curve;
}

double upper_euler_integral(const EulerCurve& curve) {
  // int_0^inf [chi_total - S(u)] du - int_0^inf S(-u) du telescopes to the
  // jump sum below; jumps at regular values are zero, so the sum is exact.
  double total = 0.0;
  std::int64_t prev = 0;
  for (std::size_t b = 0; b < curve.breakpoints.size(); ++b) {
    const std::int64_t jump = curve.chi_leq[b] - prev;
    prev = curve.chi_leq[b];
    if (jump != 0) total += static_cast<double>(jump) * curve.breakpoints[b];
  }
  return total;
}

std::vector<CriticalPoint> classify_critical_points(const FieldGrid& field, double tol) {
  const int n = field.spec.n;
  const int p = field.spec.p;
  const double h = field.spec.h;

  std::int64_t stride[3] = {0, 0, 0};
  stride[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * p;

  std::vector<CriticalPoint> out;

  // Face patterns in a fixed order: ternary counter over {-1, 0, +1} per axis.
  std::array<int, 3> face{-1, -1, -1};
  const std::int64_t patterns = [&] {
    std::int64_t t = 1;
    for (int d = 0; d < n; ++d) t *= 3;
    return t;
  }();

  for (std::int64_t fp = 0; fp < patterns; ++fp) {
    std::int64_t rem = fp;
    int free_axes[3];
    int free_count = 0;
    std::array<int, 3> fixed_idx{0, 0, 0};
    for (int d = 0; d < n; ++d) {
      face[d] = static_cast<int>(rem % 3) - 1;
      rem /= 3;
      if (face[d] == 0) {
        free_axes[free_count++] = d;
      } else {
        fixed_idx[d] = face[d] < 0 ? 0 : p - 1;
      }
    }

    // Iterate interior lattice points of the face: free axes in [1, p-2].
    std::int64_t points = 1;
    for (int b = 0; b < free_count; ++b) points *= (p - 2);
    if (free_count > 0 && p < 3) continue;

    std::array<int, 3> idx = fixed_idx;
    for (int b = 0; b < free_count; ++b) idx[free_axes[b]] = 1;

    for (std::int64_t pt = 0; pt < points; ++pt) {
      std::int64_t flat = 0;
      for (int d = 0; d < n; ++d) flat += static_cast<std::int64_t>(idx[d]) * stride[d];
      const double f0 = field.values[flat];

      bool critical = true;
      bool degenerate = false;
      for (int b = 0; b < free_count && critical; ++b) {
        const std::int64_t s = stride[free_axes[b]];
        const double fwd = field.values[flat + s] - f0;
        const double bwd = f0 - field.values[flat - s];
        if (std::abs(fwd) <= tol || std::abs(bwd) <= tol) {
          degenerate = true;
        } else if (fwd * bwd > 0.0) {
          critical = false;
        }
      }

      if (critical) {
        CriticalPoint cp;
        cp.idx = idx;
        cp.face = face;
        cp.face_dim = free_count;
        cp.value = f0;
        cp.degenerate = degenerate;

        if (free_count > 0) {
          Eigen::MatrixXd hess(free_count, free_count);
          for (int a = 0; a < free_count; ++a) {
            const std::int64_t sa = stride[free_axes[a]];
            hess(a, a) = (field.values[flat + sa] - 2.0 * f0 + field.values[flat - sa]) / (h * h);
            for (int b = a + 1; b < free_count; ++b) {
              const std::int64_t sb = stride[free_axes[b]];
              const double mixed = (field.values[flat + sa + sb] - field.values[flat + sa - sb] -
                                    field.values[flat - sa + sb] + field.values[flat - sa - sb]) /
                                   (4.0 * h * h);
              hess(a, b) = mixed;
              hess(b, a) = mixed;
            }
          }
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
          const double scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
          int mu = 0;
          for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) {
            const double ev = es.eigenvalues()[e];
            if (std::abs(ev) <= tol * scale) cp.degenerate = true;
            if (ev < 0.0) ++mu;
          }
          cp.mu = mu;
        }

        // Inward normal-cone test on the fixed axes: the one-sided derivative
        // into the cube must be nonnegative on every fixed axis.
        bool admissible = true;
        for (int d = 0; d < n; ++d) {
          if (face[d] == 0) continue;
          const std::int64_t s = stride[d];
          const double inward =
              face[d] < 0 ? field.values[flat + s] - f0 : field.values[flat - s] - f0;
          if (std::abs(inward) <= tol) cp.degenerate = true;
          if (inward < 0.0) admissible = false;
        }
        cp.boundary_indicator = admissible;
        out.push_back(cp);
      }

      for (int b = free_count - 1; b >= 0; --b) {
        if (++idx[free_axes[b]] < p - 1) break;
        idx[free_axes[b]] = 1;
      }
    }
  }
  return out;
}

MorseDecomposition morse_euler_integral(const FieldGrid& field,
                                        const std::vector<CriticalPoint>& points) {
  MorseDecomposition out;
  for (const auto& cp : points) {
    if (cp.degenerate) {
      std::ostringstream os;
      os << "degenerate critical point at lattice index (";
      for (int d = 0; d < field.spec.n; ++d) os << (d ? "," : "") << cp.idx[d];
      os << "); refine the grid spacing (currently " << field.spec.h
         << ") to separate the differences";
      throw DegeneracyError(os.str());
    }
    if (!cp.boundary_indicator) continue;
    const double sign = cp.mu % 2 == 0 ? 1.0 : -1.0;
    out.total += sign * cp.value;
    out.by_face_dim[cp.face_dim] += sign * cp.value;
    ++out.point_count;
  }
  return out;
}

MorseDecomposition morse_euler_integral(const FieldGrid& field) {
  return morse_euler_integral(field, classify_critical_points(field));
}

void write_curve_csv(const EulerCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "u,chi_leq,chi_gt\n";
  char buf[96];
  for (std::size_t b = 0; b < curve.breakpoints.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.17g,%lld,%lld\n", curve.breakpoints[b],
                  static_cast<long long>(curve.chi_leq[b]),
                  static_cast<long long>(curve.chi_total - curve.chi_leq[b]));
    out << buf;
  }
}

void write_critical_points_csv(const std::vector<CriticalPoint>& points, int n,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "i0";
  for (int d = 1; d < n; ++d) out << ",i" << d;
  out << ",face,face_dim,value,mu,admissible,degenerate\n";
  char buf[64];
  for (const auto& cp : points) {
    out << cp.idx[0];
    for (int d = 1; d < n; ++d) out << ',' << cp.idx[d];
    out << ',';
    for (int d = 0; d < n; ++d) out << (cp.face[d] < 0 ? 'L' : cp.face[d] > 0 ? 'H' : 'F');
    std::snprintf(buf, sizeof buf, ",%d,%.17g,%d,%d,%d\n", cp.face_dim, cp.value, cp.mu,
                  cp.boundary_indicator ? 1 : 0, cp.degenerate ? 1 : 0);
    out << buf;
  }
}

}  // namespace eulab
