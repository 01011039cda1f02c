#pragma once

// Euler characteristic curves of sampled fields and the two representations
// of the upper Euler integral
//
//     int f |dchi| := int_0^inf [ chi(f > u) - chi(f <= -u) ] du ,
//
// with chi(f <= u) the Euler characteristic of the sublevel cubical complex
// and chi(f > u) := chi(M) - chi(f <= u) by convention.  The sublevel complex
// assigns each cell the maximum of its vertex values, so the curve is a step
// function with breakpoints at vertex values and the integral is an exact
// finite sum.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eulab/grid.hpp"

namespace eulab {

struct EulerCurve {
  std::vector<double> breakpoints;     // strictly increasing
  std::vector<std::int64_t> chi_leq;   // value at and right of each breakpoint
  std::int64_t chi_total = 0;          // chi of the full cube complex

  // Right-continuous step evaluation; below the first breakpoint chi is 0.
  std::int64_t chi_leq_at(double u) const;
  std::int64_t chi_gt_at(double u) const { return chi_total - chi_leq_at(u); }
};

// Sublevel-set Euler characteristic curve of the sampled field.
EulerCurve ec_curve(const FieldGrid& field);

// Exact evaluation of the upper Euler integral from the curve's jumps.
double upper_euler_integral(const EulerCurve& curve);

struct CriticalPoint {
  std::array<int, 3> idx{0, 0, 0};   // lattice coordinates
  std::array<int, 3> face{0, 0, 0};  // per axis: -1 low facet, 0 free, +1 high facet
  int face_dim = 0;                  // number of free axes
  double value = 0.0;
  int mu = 0;                        // negative eigenvalues of the free-axes Hessian
  bool boundary_indicator = true;    // inward normal-cone condition on fixed axes
  bool degenerate = false;           // ambiguous differences or near-zero eigenvalue
};

// Discrete critical points of the field restricted to every face of the cube.
// A point is critical on its face when the one-sided differences change sign
// along every free axis; differences below `tol` mark the point degenerate.
std::vector<CriticalPoint> classify_critical_points(const FieldGrid& field,
                                                    double tol = 1e-9);

struct MorseDecomposition {
  double total = 0.0;
  std::array<double, 4> by_face_dim{0.0, 0.0, 0.0, 0.0};  // contribution per face dimension
  std::int64_t point_count = 0;
};

// Critical-point representation of the upper Euler integral: each admissible
// critical point contributes (-1)^mu f(s), where boundary points are
// admissible only if the gradient points into the cube along every fixed
// axis.  Degenerate critical points refuse with a resolution hint.
MorseDecomposition morse_euler_integral(const FieldGrid& field,
                                        const std::vector<CriticalPoint>& points);
MorseDecomposition morse_euler_integral(const FieldGrid& field);

// CSV exports: curve rows (u, chi_leq, chi_gt); critical point rows.
void write_curve_csv(const EulerCurve& curve, const std::string& path);
void write_critical_points_csv(const std::vector<CriticalPoint>& points, int n,
                               const std::string& path);

}  // namespace eulab
