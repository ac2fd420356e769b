#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "zfluct/detail/math.hpp"

namespace zfluct {

/// Philox 4x64-10 counter-based generator: block(counter, key) is a pure
/// function, so any (seed, sample, coefficient) triple maps to an independent
/// stream without sequential state. Verified in the tests against reference
/// output vectors.
namespace philox {

inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

using Counter = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  __uint128_t prod = static_cast<__uint128_t>(a) * b;
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

inline Counter block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

/// Uniform in (0, 1): 53 high bits, offset to exclude 0.
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// One standard complex Gaussian (variance 1 in total, 1/2 per component)
/// keyed by (seed, index, n). Identical inputs reproduce identical output.
inline void complex_gaussian(std::uint64_t seed, std::uint64_t index, std::uint64_t n,
                             double& re, double& im) {
  philox::Counter c =
      philox::block({n, index, 0x5a6f6c74ULL, 0}, {seed, 0x67616673616d70ULL});
  double u1 = uniform01(c[0]);
  double u2 = uniform01(c[1]);
  double rad = std::sqrt(-std::log(u1));  // |xi| has density 2 r e^{-r^2}
  re = rad * std::cos(2.0 * kPi * u2);
  im = rad * std::sin(2.0 * kPi * u2);
}

}  // namespace zfluct
