#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <vector>

#include "eulab/errors.hpp"
#include "eulab/euler.hpp"
#include "eulab/grid.hpp"
#include "eulab/rng.hpp"

using namespace eulab;

namespace {

// Brute-force reference: enumerate every cell of the cubical complex as a
// (start, extent) choice per axis and threshold on the max of its corners.
// Intentionally a different traversal than the library's slot scan.
long long oracle_chi_leq(const FieldGrid& field, double u) {
  const int n = field.spec.n;
  const int p = field.spec.p;
  long long chi = 0;

  std::array<int, 3> start{0, 0, 0};
  std::array<int, 3> ext{0, 0, 0};

  const auto cell_max = [&]() {
    double best = -1e300;
    std::array<int, 3> corner{0, 0, 0};
    const int corners = 1 << (ext[0] + ext[1] + ext[2]);
    for (int mask = 0; mask < corners; ++mask) {
      int bit = 0;
      for (int d = 0; d < 3; ++d) {
        corner[d] = start[d];
        if (ext[d]) corner[d] += (mask >> bit++) & 1;
      }
      best = std::max(best, field.at({corner[0], corner[1], corner[2]}));
    }
    return best;
  };

  const std::function<void(int)> rec = [&](int axis) {
    if (axis == n) {
      const int dim = ext[0] + ext[1] + ext[2];
      if (cell_max() <= u) chi += (dim % 2 == 0) ? 1 : -1;
      return;
    }
    for (int e = 0; e <= 1; ++e) {
      ext[axis] = e;
      for (int s = 0; s + e <= p - 1; ++s) {
        start[axis] = s;
        rec(axis + 1);
      }
    }
    ext[axis] = 0;
    start[axis] = 0;
  };
  rec(0);
  return chi;
}

// Reference integral by interval decomposition of the defining formula,
// independent of the library's jump-sum evaluation.
double oracle_integral(const FieldGrid& field) {
  std::set<double> distinct(field.values.begin(), field.values.end());
  std::vector<double> vs(distinct.begin(), distinct.end());

  double total = 0.0;
  // Positive part: integral of chi(f > u) over u in (0, max].
  std::vector<double> cuts{0.0};
  for (double v : vs)
    if (v > 0.0) cuts.push_back(v);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    total += (1 - oracle_chi_leq(field, mid)) * (cuts[i + 1] - cuts[i]);
  }
  // Negative part: minus the integral of chi(f <= -u) over u in (0, -min].
  cuts.assign(1, 0.0);
  for (double v : vs)
    if (v < 0.0) cuts.push_back(-v);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    total -= oracle_chi_leq(field, -mid) * (cuts[i + 1] - cuts[i]);
  }
  return total;
}

FieldGrid make_grid(int n, int p, double h = 0.5) {
  return FieldGrid(GridSpec(n, h * (p - 1), h));
}

}  // namespace

TEST_CASE("curves match the brute-force complex on random grids") {
  int case_id = 0;
  for (int n : {1, 2, 3}) {
    for (int p : {2, 3, 4}) {
      for (int rep = 0; rep < 4; ++rep) {
        FieldGrid field = make_grid(n, p);
        const NormalStream stream(991, ++case_id);
        for (std::size_t i = 0; i < field.values.size(); ++i) {
          const double z = stream(i);
          // Half the cases quantize to force ties across cells.
          field.values[i] = (rep % 2 == 0) ? z : std::round(z * 4.0) / 4.0;
        }

        const EulerCurve curve = ec_curve(field);
        CHECK(curve.chi_total == 1);  // the full complex is a cube

        // Agreement at breakpoints, between them, and outside the range.
        for (std::size_t b = 0; b < curve.breakpoints.size(); ++b) {
          CHECK(curve.chi_leq_at(curve.breakpoints[b]) ==
                oracle_chi_leq(field, curve.breakpoints[b]));
          if (b + 1 < curve.breakpoints.size()) {
            const double mid = 0.5 * (curve.breakpoints[b] + curve.breakpoints[b + 1]);
            CHECK(curve.chi_leq_at(mid) == oracle_chi_leq(field, mid));
          }
        }
        CHECK(curve.chi_leq_at(curve.breakpoints.front() - 1.0) == 0);
        CHECK(curve.chi_gt_at(curve.breakpoints.front() - 1.0) == 1);
        CHECK(curve.chi_leq_at(curve.breakpoints.back() + 1.0) == 1);

        const double via_jumps = upper_euler_integral(curve);
        const double via_intervals = oracle_integral(field);
        CHECK(via_jumps == doctest::Approx(via_intervals).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("constant fields integrate to the constant") {
  for (double c : {-2.5, 0.0, 3.75}) {
    for (int n : {1, 2, 3}) {
      FieldGrid field = make_grid(n, 3);
      std::fill(field.values.begin(), field.values.end(), c);
      const EulerCurve curve = ec_curve(field);
      CHECK(curve.breakpoints.size() == 1);
      CHECK(curve.chi_total == 1);
      CHECK(upper_euler_integral(curve) == c);
    }
  }
}

TEST_CASE("monotone profiles integrate to the minimum endpoint value") {
  FieldGrid up = make_grid(1, 5, 0.25);
  FieldGrid down = make_grid(1, 5, 0.25);
  for (int i = 0; i < 5; ++i) {
    up.values[i] = 2.0 + 0.25 * i;
    down.values[i] = 3.0 - 0.25 * i;
  }
  CHECK(upper_euler_integral(ec_curve(up)) == 2.0);
  CHECK(upper_euler_integral(ec_curve(down)) == 2.0);
  // Two vertices only.
  FieldGrid tiny = make_grid(1, 2, 0.5);
  tiny.values = {1.5, -0.75};
  CHECK(upper_euler_integral(ec_curve(tiny)) == -0.75);
}

TEST_CASE("a full period of sine integrates to minus four exactly") {
  const double m = 4.0 * std::acos(-1.0);
  const int segments = 1264;  // divisible by 8, so the grid hits the extrema
  const GridSpec spec(1, m, m / segments);
  REQUIRE(spec.p == segments + 1);
  REQUIRE(spec.h <= 0.01);
  FieldGrid field(spec);
  for (int i = 0; i <= segments; ++i) field.values[i] = std::sin(i * spec.h);
  CHECK(field.values[segments / 8] == 1.0);
  CHECK(field.values[3 * segments / 8] == -1.0);
  CHECK(upper_euler_integral(ec_curve(field)) == -4.0);
}

TEST_CASE("fields with separated supports add exactly") {
  const auto lobe = [](int i, int lo, int hi, int amp) {
    if (i <= lo || i >= hi) return 0;
    const int mid = (lo + hi) / 2;
    return amp * (hi - lo - 2 * std::abs(i - mid)) / 2;
  };

  SUBCASE("one dimension") {
    FieldGrid f = make_grid(1, 101, 0.25);
    FieldGrid g = make_grid(1, 101, 0.25);
    FieldGrid sum = make_grid(1, 101, 0.25);
    for (int i = 0; i < 101; ++i) {
      f.values[i] = (lobe(i, 8, 16, 3) - lobe(i, 16, 24, 5)) / 64.0;
      g.values[i] = (lobe(i, 60, 78, 4) - lobe(i, 74, 90, 2)) / 64.0;
      sum.values[i] = f.values[i] + g.values[i];
    }
    const double a = upper_euler_integral(ec_curve(f));
    const double b = upper_euler_integral(ec_curve(g));
    CHECK(upper_euler_integral(ec_curve(sum)) == a + b);
    CHECK(a != 0.0);
    CHECK(b != 0.0);
  }

  SUBCASE("two dimensions") {
    FieldGrid f = make_grid(2, 41, 0.25);
    FieldGrid g = make_grid(2, 41, 0.25);
    FieldGrid sum = make_grid(2, 41, 0.25);
    for (int i = 0; i < 41; ++i) {
      for (int j = 0; j < 41; ++j) {
        const double fv = lobe(i, 2, 14, 2) * lobe(j, 2, 14, 2) / 64.0 -
                          lobe(i, 4, 12, 1) * lobe(j, 18, 30, 1) / 64.0;
        const double gv = -lobe(i, 24, 38, 3) * lobe(j, 24, 38, 1) / 64.0;
        f.at({i, j}) = fv;
        g.at({i, j}) = gv;
        sum.at({i, j}) = fv + gv;
      }
    }
    const double a = upper_euler_integral(ec_curve(f));
    const double b = upper_euler_integral(ec_curve(g));
    CHECK(upper_euler_integral(ec_curve(sum)) == a + b);
    CHECK(b != 0.0);
  }
}

TEST_CASE("saddle classification and the two representations agree") {
  const GridSpec spec(2, 4.0, 0.1);
  FieldGrid field(spec);
  for (int i = 0; i < spec.p; ++i)
    for (int j = 0; j < spec.p; ++j) {
      const double x = spec.coord(i) - 2.0, y = spec.coord(j) - 2.0;
      field.at({i, j}) = x * x - y * y;
    }

  const auto points = classify_critical_points(field);
  bool saw_saddle = false;
  for (const auto& cp : points) {
    if (cp.face_dim == 2) {
      CHECK(cp.idx[0] == spec.p / 2);
      CHECK(cp.idx[1] == spec.p / 2);
      CHECK(cp.mu == 1);
      CHECK_FALSE(cp.degenerate);
      saw_saddle = true;
    }
  }
  CHECK(saw_saddle);

  const MorseDecomposition morse = morse_euler_integral(field, points);
  const double upper = upper_euler_integral(ec_curve(field));
  CHECK(upper == doctest::Approx(-8.0).epsilon(1e-12));
  CHECK(morse.total == doctest::Approx(upper).epsilon(1e-12));
  // The saddle sits at height zero, so every contribution is from edges.
  CHECK(morse.by_face_dim[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the inward-cone test uses every fixed axis separately") {
  // f = x + 2y on the unit square: only the lowest corner is admissible.
  const GridSpec spec(2, 1.0, 0.25);
  FieldGrid field(spec);
  for (int i = 0; i < spec.p; ++i)
    for (int j = 0; j < spec.p; ++j)
      field.at({i, j}) = spec.coord(i) + 2.0 * spec.coord(j);

  const auto points = classify_critical_points(field);
  int admissible = 0;
  for (const auto& cp : points) {
    REQUIRE(cp.face_dim == 0);  // monotone field: only corners are critical
    const bool is_origin = cp.idx[0] == 0 && cp.idx[1] == 0;
    CHECK(cp.boundary_indicator == is_origin);
    admissible += cp.boundary_indicator ? 1 : 0;
  }
  CHECK(admissible == 1);

  const MorseDecomposition morse = morse_euler_integral(field, points);
  CHECK(morse.total == 0.0);
  CHECK(morse.point_count == 1);
  CHECK(upper_euler_integral(ec_curve(field)) == 0.0);
}

TEST_CASE("degenerate critical points refuse with a resolution hint") {
  FieldGrid field = make_grid(1, 4);
  field.values = {0.0, 1.0, 1.0, 0.0};  // interior plateau
  try {
    morse_euler_integral(field);
    FAIL("expected DegeneracyError");
  } catch (const DegeneracyError& e) {
    CHECK(std::string(e.what()).find("refine the grid") != std::string::npos);
  }
}

TEST_CASE("curve export uses the documented column layout") {
  FieldGrid field = make_grid(1, 3);
  field.values = {1.0, -0.5, 0.25};
  const std::string path = "curve_test.csv";
  write_curve_csv(ec_curve(field), path);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  in.close();
  std::filesystem::remove(path);
  CHECK(header == "u,chi_leq,chi_gt");
  CHECK(first == "-0.5,1,0");
}
