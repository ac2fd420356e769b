#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "zfluct/detail/math.hpp"

namespace zfluct::detail {

// In-place iterative radix-2 transform, sign = +1 evaluates
// X_j = sum_n x_n e^{+2 pi i j n / N} (no normalization). N must be a power
// of two.
inline void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wl = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w{1.0, 0.0};
      for (std::size_t k = 0; k < len / 2; ++k) {
        if ((k & 0x3f) == 0)  // resync the twiddle to curb recurrence drift
          w = std::polar(1.0, ang * static_cast<double>(k));
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Values of the polynomial sum c_n w^n at the m-th roots of unity
// w_j = e^{2 pi i j / m}, in angular order. m must be a power of two
// >= coeffs.size().
inline std::vector<std::complex<double>> eval_on_circle(
    const std::vector<std::complex<double>>& coeffs, std::size_t m) {
  std::vector<std::complex<double>> a(m, {0.0, 0.0});
  for (std::size_t i = 0; i < coeffs.size(); ++i) a[i] = coeffs[i];
  fft_pow2(a, +1);
  return a;
}

}  // namespace zfluct::detail
