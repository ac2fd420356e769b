#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "zfluct/detail/fft.hpp"
#include "zfluct/rng.hpp"
#include "zfluct/tilted_window.hpp"

namespace zfluct {

/// One truncated random Taylor polynomial: c_n = xi_n sqrt(p_n) for
/// n in [0, n_max], with xi_n i.i.d. standard complex Gaussians drawn from a
/// counter-based stream keyed by (seed, index, n).
struct GafSample {
  std::vector<std::complex<double>> coeffs;
  std::uint64_t seed = 0;
  std::int64_t index = 0;
};

inline GafSample sample_coeffs(const TiltedWindow& w, std::uint64_t seed, std::int64_t index) {
  GafSample s;
  s.seed = seed;
  s.index = index;
  s.coeffs.assign(static_cast<std::size_t>(w.n_max()) + 1, {0.0, 0.0});
  for (std::size_t j = 0; j < w.p.size(); ++j) {
    double pj = w.p[j];
    if (pj <= 0.0) continue;
    std::int64_t n = w.first + static_cast<std::int64_t>(j);
    double re, im;
    complex_gaussian(seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(n),
                     re, im);
    double amp = std::sqrt(pj);
    s.coeffs[static_cast<std::size_t>(n)] = {amp * re, amp * im};
  }
  return s;
}

struct CountOptions {
  std::size_t min_points = 256;
  std::size_t max_points = 1u << 18;     // base contour grid cap
  std::size_t refine_budget = 1u << 17;  // extra arc-bisection evaluations
  double min_arc = 1e-12;                // smallest arc before a boundary zero fails the count
  double integer_tol = 1e-6;             // |total/2pi - round| must be below this
  bool companion_check = false;          // cross-check against the eigenvalue oracle
  std::size_t companion_cap = 512;       // largest degree the oracle accepts
};

struct ZeroCount {
  bool ok = false;
  std::int64_t count = 0;
  std::string reason;  // set when !ok
};

namespace detail {

inline std::size_t next_pow2(std::size_t x) {
  std::size_t m = 1;
  while (m < x) m <<= 1;
  return m;
}

inline std::complex<double> horner_on_circle(const std::vector<std::complex<double>>& coeffs,
                                             double ang) {
  std::complex<double> w = std::polar(1.0, ang);
  std::complex<double> acc{0.0, 0.0};
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * w + *it;
  return acc;
}

// Winding number of P around 0 along |w| = 1. Starts from M equally spaced
// samples; any arc whose phase increment reaches pi/2 is bisected with direct
// evaluations until the increments settle, so zeros merely close to the
// contour cost a handful of extra points instead of a global grid blow-up.
// Fails (returns false) on arcs shrunk below min_arc (a zero essentially on
// the contour), exhausted budget, untrustably small |P|, or a non-integer
// total.
inline bool winding_adaptive(const std::vector<std::complex<double>>& coeffs,
                             const std::vector<std::complex<double>>& vals,
                             const CountOptions& opts, std::int64_t& out) {
  const std::size_t m = vals.size();
  double max_abs = 0.0;
  for (const auto& v : vals) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) return false;
  const double floor = 1e-13 * max_abs;
  const double step = 2.0 * kPi / static_cast<double>(m);

  KahanSum total;
  std::size_t budget = opts.refine_budget;
  struct Arc {
    double a, b;
    std::complex<double> va, vb;
  };
  std::vector<Arc> stack;
  for (std::size_t j = 0; j < m; ++j) {
    stack.push_back({static_cast<double>(j) * step, static_cast<double>(j + 1) * step,
                     vals[j], vals[(j + 1) % m]});
    while (!stack.empty()) {
      Arc arc = stack.back();
      stack.pop_back();
      if (std::abs(arc.va) < floor || std::abs(arc.vb) < floor) return false;
      double d = std::arg(arc.vb) - std::arg(arc.va);
      if (d > kPi) d -= 2.0 * kPi;
      if (d < -kPi) d += 2.0 * kPi;
      if (std::abs(d) < 0.5 * kPi) {
        total.add(d);
        continue;
      }
      if (arc.b - arc.a < opts.min_arc || budget == 0) return false;
      --budget;
      double mid = 0.5 * (arc.a + arc.b);
      std::complex<double> vm = horner_on_circle(coeffs, mid);
      stack.push_back({mid, arc.b, vm, arc.vb});
      stack.push_back({arc.a, mid, arc.va, vm});
    }
  }
  double turns = total.value() / (2.0 * kPi);
  double rounded = std::round(turns);
  if (std::abs(turns - rounded) > opts.integer_tol || rounded < 0.0) return false;
  out = static_cast<std::int64_t>(rounded);
  return true;
}

}  // namespace detail

/// Zeros of P(w) = sum c_n w^n with |w| < 1, counted with multiplicity via
/// the eigenvalues of the companion matrix. Exact-zero leading coefficients
/// are trimmed first.
inline std::int64_t companion_zero_count(const std::vector<std::complex<double>>& coeffs) {
  std::size_t deg = coeffs.size();
  while (deg > 0 && coeffs[deg - 1] == std::complex<double>{0.0, 0.0}) --deg;
  if (deg == 0) throw model_error("companion_zero_count: zero polynomial");
  --deg;  // coeffs[deg] is the leading coefficient
  if (deg == 0) return 0;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(deg),
                                              static_cast<Eigen::Index>(deg));
  for (std::size_t i = 0; i + 1 < deg; ++i)
    c(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
  for (std::size_t i = 0; i < deg; ++i)
    c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) =
        -coeffs[i] / coeffs[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(c, /*computeEigenvectors=*/false);
  std::int64_t inside = 0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    if (std::abs(solver.eigenvalues()[i]) < 1.0) ++inside;
  return inside;
}

/// Argument-principle zero count of the sample polynomial in |w| <= 1:
/// accumulated phase increments at M circle points, M doubling until every
/// increment stays under pi/2 and the total winds an integer number of turns.
///
/// When the nonzero coefficients live on an index lattice g Z (lacunary
/// restrictions), P(w) = Q(w^g) and each zero of Q in the disk accounts for
/// exactly g zeros of P, so the compressed polynomial is counted instead.
inline ZeroCount count_zeros_unit_disk(const GafSample& sample, const CountOptions& opts = {}) {
  ZeroCount res;
  std::size_t deg = sample.coeffs.size();
  while (deg > 0 && sample.coeffs[deg - 1] == std::complex<double>{0.0, 0.0}) --deg;
  if (deg == 0) {
    res.reason = "zero polynomial";
    return res;
  }
  std::int64_t lattice = 0;
  for (std::size_t n = 0; n < deg; ++n)
    if (sample.coeffs[n] != std::complex<double>{0.0, 0.0})
      lattice = detail::gcd64(lattice, static_cast<std::int64_t>(n));
  if (lattice < 1) lattice = 1;  // only c_0 nonzero: a constant
  std::vector<std::complex<double>> trimmed;
  trimmed.reserve((deg - 1) / static_cast<std::size_t>(lattice) + 1);
  for (std::size_t n = 0; n < deg; n += static_cast<std::size_t>(lattice))
    trimmed.push_back(sample.coeffs[n]);
  const std::size_t qdeg = trimmed.size();

  std::size_t m0 = std::min(detail::next_pow2(std::max(opts.min_points, 4 * qdeg)),
                            detail::next_pow2(opts.max_points));
  // one coarse and one shifted-density retry; refinement does the local work
  for (std::size_t m = m0; m <= std::max(m0, 4 * m0); m <<= 2) {
    auto vals = detail::eval_on_circle(trimmed, m);
    std::int64_t count = 0;
    if (detail::winding_adaptive(trimmed, vals, opts, count)) {
      if (opts.companion_check && qdeg - 1 >= 1 && qdeg - 1 <= opts.companion_cap) {
        std::int64_t oracle = companion_zero_count(trimmed);
        if (oracle != count) {
          res.reason = "companion-matrix count " + std::to_string(oracle) +
                       " disagrees with winding count " + std::to_string(count);
          return res;
        }
      }
      res.ok = true;
      res.count = lattice * count;
      return res;
    }
  }
  res.reason = "winding number failed to stabilize (zero too close to the contour)";
  return res;
}

}  // namespace zfluct
