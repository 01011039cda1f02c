#pragma once

// Counter-based random number generation (Philox4x64-10).
//
// Every consumer addresses randomness as (key, counter) -> 256 output bits,
// so draws are reproducible bit-for-bit independent of evaluation order and
// thread count.  The generator matches the Philox4x64 variant with 10 rounds
// as shipped by Random123 and numpy.random.Philox.

#include <array>
#include <cmath>
#include <cstdint>

namespace eulab {

// Stream tags separating independent uses of one seed.
inline constexpr std::uint64_t kStreamField = 0x6669656C64ULL;       // "field"
inline constexpr std::uint64_t kStreamMonteCarlo = 0x6D63ULL;        // "mc"

namespace detail {

inline std::uint64_t mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  return static_cast<std::uint64_t>(p);
}

}  // namespace detail

struct Philox4x64 {
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter round(Counter c, const Key& k) {
    std::uint64_t hi0, hi1;
    const std::uint64_t lo0 = detail::mulhilo64(kMul0, c[0], hi0);
    const std::uint64_t lo1 = detail::mulhilo64(kMul1, c[2], hi1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  // 10-round block function; key is bumped by the Weyl constants between rounds.
  static Counter block(Counter c, Key k) {
    c = round(c, k);
    for (int r = 1; r < 10; ++r) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
      c = round(c, k);
    }
    return c;
  }
};

// SplitMix64 finalizer; used to fold identifiers into derived seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Two independent standard normals from one Philox block via Box-Muller.
// The radius uses 1-u in (0,1] so the logarithm never sees zero.
inline std::array<double, 2> normal_pair(const Philox4x64::Key& key,
                                         const Philox4x64::Counter& ctr) {
  const auto out = Philox4x64::block(ctr, key);
  const double u1 = 1.0 - to_unit_interval(out[0]);
  const double u2 = to_unit_interval(out[1]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// Stream of standard normals addressed by (seed, stream, index); stateless.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream} {}

  // i-th normal of the stream; consecutive indices share Philox blocks.
  double operator()(std::uint64_t i) const {
    const auto pair = normal_pair(key_, {i >> 1, 0, 0, 0});
    return pair[i & 1];
  }

  std::array<double, 2> pair(std::uint64_t block_index) const {
    return normal_pair(key_, {block_index, 0, 0, 0});
  }

 private:
  Philox4x64::Key key_;
};

// Deterministic replicate seeds: fold the base seed with the bit patterns of
// the run parameters.  Stable across platforms and thread schedules.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = mix64(base ^ 0x243F6A8885A308D3ULL);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  return s;
}

}  // namespace eulab
