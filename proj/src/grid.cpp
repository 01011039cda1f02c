#include "eulab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace eulab {

GridSpec::GridSpec(int n_, double m_, double h_) : n(n_), m(m_), h(h_) {
  if (n < 1 || n > 3) throw ConfigError("GridSpec: dimension must be 1, 2, or 3");
  if (!(m > 0.0) || !(h > 0.0)) throw ConfigError("GridSpec: m and h must be positive");
  p = static_cast<int>(std::lround(m / h)) + 1;
  if (p < 2) throw ConfigError("GridSpec: fewer than two vertices per axis");
  if (std::abs(h * (p - 1) - m) > 1e-9) {
    std::ostringstream os;
    os << "GridSpec: spacing " << h << " does not tile side length " << m
       << " (h*(p-1) - m = " << h * (p - 1) - m << ", tolerance 1e-9)";
    throw ConfigError(os.str());
  }
}

std::int64_t GridSpec::vertex_count() const {
  std::int64_t c = 1;
  for (int d = 0; d < n; ++d) c *= p;
  return c;
}

FieldGrid::FieldGrid(const GridSpec& s) : spec(s), values(s.vertex_count(), 0.0) {}

void write_field_csv(const FieldGrid& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  const int n = field.spec.n;
  out << "i0";
  for (int d = 1; d < n; ++d) out << ",i" << d;
  out << ",value\n";
  char buf[64];
  std::array<int, 3> idx{0, 0, 0};
  const std::int64_t total = field.spec.vertex_count();
  for (std::int64_t f = 0; f < total; ++f) {
    out << idx[0];
    for (int d = 1; d < n; ++d) out << ',' << idx[d];
    std::snprintf(buf, sizeof buf, ",%.17g\n", field.values[f]);
    out << buf;
    for (int d = n - 1; d >= 0; --d) {
      if (++idx[d] < field.spec.p) break;
      idx[d] = 0;
    }
  }
}

namespace {
constexpr char kMagic[8] = {'E', 'U', 'L', 'F', 'G', 'R', 'D', '1'};

template <typename T>
void put_le(std::string& s, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    s.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return static_cast<T>(v);
}
}  // namespace

void write_field_binary(const FieldGrid& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  std::string header(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(header, static_cast<std::uint32_t>(field.spec.n));
  put_le<std::uint32_t>(header, static_cast<std::uint32_t>(field.spec.p));
  std::uint64_t hbits;
  std::memcpy(&hbits, &field.spec.h, sizeof hbits);
  put_le<std::uint64_t>(header, hbits);
  put_le<std::uint64_t>(header, field.seed);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (double v : field.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    char raw[8];
    for (int i = 0; i < 8; ++i) raw[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(raw, 8);
  }
}

FieldGrid read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  char header[32];
  in.read(header, sizeof header);
  if (!in || std::memcmp(header, kMagic, sizeof kMagic) != 0) {
    throw ConfigError("not a field binary (bad magic): " + path);
  }
  const auto n = get_le<std::uint32_t>(header + 8);
  const auto p = get_le<std::uint32_t>(header + 12);
  const auto hbits = get_le<std::uint64_t>(header + 16);
  const auto seed = get_le<std::uint64_t>(header + 24);
  double h;
  std::memcpy(&h, &hbits, sizeof h);
  GridSpec spec(static_cast<int>(n), h * (p - 1), h);
  if (spec.p != static_cast<int>(p)) throw ConfigError("field binary header inconsistent");
  FieldGrid field(spec);
  field.seed = seed;
  for (double& v : field.values) {
    char raw[8];
    in.read(raw, 8);
    if (!in) throw ConfigError("field binary truncated: " + path);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
    std::memcpy(&v, &bits, sizeof v);
  }
  return field;
}

}  // namespace eulab
