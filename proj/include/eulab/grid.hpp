#pragma once

// Regular grids over the cube [0, m]^n and sampled scalar fields on them.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eulab/errors.hpp"

namespace eulab {

struct GridSpec {
  int n = 1;        // ambient dimension, 1..3
  double m = 1.0;   // cube side length
  double h = 0.1;   // lattice spacing
  int p = 0;        // vertices per axis, round(m/h) + 1

  GridSpec() = default;
  GridSpec(int n_, double m_, double h_);

  std::int64_t vertex_count() const;
  // Physical coordinate of vertex index i along one axis.
  double coord(int i) const { return i * h; }
};

// Scalar field sampled at the vertices of a GridSpec, row-major with the last
// axis fastest.
struct FieldGrid {
  GridSpec spec;
  std::uint64_t seed = 0;  // origin of the sample; 0 for synthetic fields
  std::vector<double> values;

  explicit FieldGrid(const GridSpec& s);

  std::int64_t flat(std::array<int, 3> idx) const {
    std::int64_t f = 0;
    for (int d = 0; d < spec.n; ++d) f = f * spec.p + idx[d];
    return f;
  }
  double at(std::array<int, 3> idx) const { return values[flat(idx)]; }
  double& at(std::array<int, 3> idx) { return values[flat(idx)]; }
};

// Text dump: one line per vertex, index tuple then value, 17 significant digits.
void write_field_csv(const FieldGrid& field, const std::string& path);

// Binary dump: 32-byte header (magic "EULFGRD1", u32 n, u32 p, f64 h, u64 seed,
// all little-endian) followed by the row-major float64 payload.
void write_field_binary(const FieldGrid& field, const std::string& path);
FieldGrid read_field_binary(const std::string& path);

}  // namespace eulab
