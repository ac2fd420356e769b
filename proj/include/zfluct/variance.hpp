#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "zfluct/coeff_model.hpp"
#include "zfluct/quadrature.hpp"
#include "zfluct/tilted_window.hpp"

namespace zfluct {

// The variance of the zero count in |z| <= r equals (1/2pi) times the
// integral over [-pi, pi] of the spectral density
//   V(theta) = |m(theta)|^2 / (1 - |phi(theta)|^2),
// where phi and m are the characteristic moments of the tilted window at
// t = 2 log r. V extends continuously to B(t) at theta = 0.

struct VarianceOptions {
  double tail_eps = 1e-12;
  double rel_tol = 1e-9;
  double c_g = 2.5;  // only seeds the initial subdivision
  std::int64_t max_evaluations = 1'000'000;
  std::int64_t max_index = 2'000'000;
  // Hand over to the Taylor branch of the integrand when theta^2 B(t) drops
  // below this threshold (and every centered phase is small).
  double series_crossover = 1e-4;
};

namespace detail {

// Fold theta onto the fundamental period of a lattice-supported window.
// When every index with positive mass lies in c + d Z, both phi and m pick up
// only a unimodular factor under theta -> theta + 2 pi/d, so V is 2 pi/d
// periodic and the reduction is exact.
inline double reduce_to_period(double theta, std::int64_t gap) {
  if (gap <= 1) return theta;
  double period = 2.0 * kPi / static_cast<double>(gap);
  return theta - period * std::round(theta / period);
}

// Taylor branch near a removable singularity:
// V(theta) = B (1 + c1 theta^2 + O(theta^4)) with
// c1 = (mu3^2 - mu4 B + B^3) / (4 B^2) <= 0.
inline double integrand_series(const TiltedWindow& w, double th) {
  const double B = w.var;
  double c1 = (w.mu3 * w.mu3 / B - w.mu4 + B * B) / (4.0 * B);
  return std::clamp(B * (1.0 + c1 * th * th), 0.0, B);
}

// Direct ratio with phases centered at the window mean.
//
// Numerator: m(theta) corrected by the residual linear moment, so its zero at
// theta = 0 is structural rather than a cancellation. Denominator: the window
// is a normalized law, so 1 - |phi|^2 has the exact pair form
//   sum_{j<k} 4 p_j p_k sin^2((n_j - n_k) theta / 2),
// which is evaluated as written up to kPairCap atoms (per-pair sines for
// small windows, product-form sines beyond 256 atoms) and through the
// factored mass identity for large smooth windows, where the half-angle sum
// already carries full relative accuracy.
inline constexpr std::size_t kPairCap = 1024;

inline double integrand_direct(const TiltedWindow& w, double th) {
  const std::size_t k = w.atoms.size();
  KahanSum mass_s, s2_s, imphi_s, mre_s, mim_s, lin_s;
  std::vector<double> ps, sh, ch;
  const bool pair_form = k <= kPairCap;
  if (pair_form) {
    ps.reserve(k);
    sh.reserve(k);
    ch.reserve(k);
  }
  for (std::int64_t n : w.atoms) {
    double pj = w.prob(n);
    double d = static_cast<double>(n) - w.mean;
    double s = std::sin(0.5 * d * th);
    double c = std::cos(0.5 * d * th);
    double sd = 2.0 * s * c;        // sin(d th)
    double cd = 1.0 - 2.0 * s * s;  // cos(d th)
    mass_s.add(pj);
    s2_s.add(2.0 * pj * s * s);
    imphi_s.add(pj * sd);
    mre_s.add(pj * d * cd);
    mim_s.add(pj * d * sd);
    lin_s.add(pj * d);
    if (pair_form) {
      ps.push_back(pj);
      sh.push_back(s);
      ch.push_back(c);
    }
  }
  double mass = mass_s.value();
  double s2 = s2_s.value();
  double imphi = imphi_s.value();
  // residual of the centered first moment (pure roundoff of the mean)
  double lin = lin_s.value();
  double mre = mre_s.value() - lin * (mass - s2);
  double mim = mim_s.value() - lin * imphi;
  double num = mre * mre + mim * mim;

  double den;
  if (pair_form) {
    KahanSum den_s;
    if (k <= 256) {
      for (std::size_t a = 0; a + 1 < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
          double s = std::sin(0.5 * th * static_cast<double>(w.atoms[b] - w.atoms[a]));
          den_s.add(4.0 * ps[a] * ps[b] * s * s);
        }
    } else {
      for (std::size_t a = 0; a + 1 < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
          double s = sh[b] * ch[a] - ch[b] * sh[a];  // sin((d_b - d_a) th / 2)
          den_s.add(4.0 * ps[a] * ps[b] * s * s);
        }
    }
    den = den_s.value();
  } else {
    double defect = 1.0 - mass;
    den = (defect + s2) * (1.0 + mass - s2) - imphi * imphi;
  }
  if (den < 1e-300) return w.var;
  return num / den;
}

}  // namespace detail

/// Pointwise spectral density V(theta) >= 0 of the variance integral. The
/// Taylor branch handles the neighborhood of the removable singularity where
/// every centered phase (n - A) theta is small.
inline double integrand(const TiltedWindow& w, double theta,
                        double series_crossover = 1e-4) {
  const double B = w.var;
  if (B <= 0.0) return 0.0;
  double th = detail::reduce_to_period(theta, w.lattice_gap);
  if (th * th * B < series_crossover && std::abs(th) * w.spread < 0.05)
    return detail::integrand_series(w, th);
  return detail::integrand_direct(w, th);
}

namespace detail {

// delta(t) = sqrt(C_G log B / B); falls back to B^{-1/2} when log B is too
// small for the type-I expression to make sense.
inline double delta_scale(double B, double c_g) {
  if (B <= 0.0) return kPi;
  if (std::log(B) > 1.0 / c_g) return std::sqrt(c_g * std::log(B) / B);
  return 1.0 / std::sqrt(B);
}

// Subdivision hints: multiples of delta near every lattice spike of the
// integrand, then geometric growth; the mass concentrates in |theta - spike|
// of order B^{-1/2}.
inline std::vector<double> seed_breakpoints(const TiltedWindow& w, double lo, double hi,
                                            double c_g) {
  std::vector<double> cuts;
  if (w.var <= 0.0) return cuts;
  double d = delta_scale(w.var, c_g);
  std::vector<double> offsets;
  for (double x : {1.0, 2.0, 3.0, 4.0}) offsets.push_back(x * d);
  for (double x = 8.0 * d; x < 2.0 * kPi; x *= 2.0) offsets.push_back(x);
  double period = w.lattice_gap > 1 ? 2.0 * kPi / static_cast<double>(w.lattice_gap) : kInf;
  double spike = 0.0;
  for (std::int64_t k = 0;; ++k) {
    spike = period == kInf ? 0.0 : static_cast<double>(k) * period;
    for (double off : offsets) {
      cuts.push_back(spike - off);
      cuts.push_back(spike + off);
    }
    if (period != kInf) cuts.push_back(spike + 0.5 * period);
    if (period == kInf || spike > hi + period) break;
  }
  std::erase_if(cuts, [&](double x) { return x <= lo || x >= hi; });
  return cuts;
}

inline QuadratureResult integrate_v(const TiltedWindow& w, double lo, double hi,
                                    const VarianceOptions& opts) {
  QuadratureOptions q;
  q.rel_tol = opts.rel_tol;
  q.max_evaluations = opts.max_evaluations;
  q.breakpoints = seed_breakpoints(w, lo, hi, opts.c_g);
  auto f = [&](double th) { return integrand(w, th, opts.series_crossover); };
  QuadratureResult r = integrate_adaptive(f, lo, hi, q);
  r.value /= 2.0 * kPi;
  r.abs_error_estimate /= 2.0 * kPi;
  if (r.value < 0.0) r.value = 0.0;
  return r;
}

}  // namespace detail

/// (1/2pi) integral of V over [theta_lo, theta_hi].
inline QuadratureResult integral_over(const TiltedWindow& w, double theta_lo, double theta_hi,
                                      double rel_tol = 1e-9,
                                      const VarianceOptions& opts_in = {}) {
  if (!(theta_lo >= -kPi - 1e-12 && theta_lo < theta_hi && theta_hi <= kPi + 1e-12))
    throw model_error("integral_over: need -pi <= theta_lo < theta_hi <= pi");
  VarianceOptions opts = opts_in;
  opts.rel_tol = rel_tol;
  return detail::integrate_v(w, theta_lo, theta_hi, opts);
}

/// Exact variance of the zero count in |z| <= r: the full integral at
/// t = 2 log r, using evenness (and lattice periodicity when present).
inline QuadratureResult variance_exact(const CoefficientModel& model, double r,
                                       double rel_tol = 1e-9,
                                       const VarianceOptions& opts_in = {}) {
  if (!(r > 0.0)) throw model_error("variance_exact: r must be positive");
  double t = 2.0 * std::log(r);
  if (!(t < model.t_g)) throw model_error("variance_exact: need 2 log r < t_G");
  VarianceOptions opts = opts_in;
  opts.rel_tol = rel_tol;
  TiltedWindow w = tilted_window(model, t, opts.tail_eps, {opts.max_index});
  if (w.var <= 0.0) return {0.0, 0.0, 0, true};
  std::int64_t g = w.lattice_gap > 1 ? w.lattice_gap : 1;
  QuadratureResult res = detail::integrate_v(w, 0.0, kPi / static_cast<double>(g), opts);
  res.value *= 2.0 * static_cast<double>(g);
  res.abs_error_estimate *= 2.0 * static_cast<double>(g);
  return res;
}

/// Expected zero count in |z| <= r: a(r^2) = A(2 log r).
inline double mean_exact(const CoefficientModel& model, double r,
                         const VarianceOptions& opts = {}) {
  if (!(r > 0.0)) throw model_error("mean_exact: r must be positive");
  double t = 2.0 * std::log(r);
  if (!(t < model.t_g)) throw model_error("mean_exact: need 2 log r < t_G");
  return tilted_window(model, t, opts.tail_eps, {opts.max_index}).mean;
}

/// The variance bounds and the type-I asymptotic at one radius.
struct BoundsReport {
  double mean = 0.0;             // A(t) = E[n_f(r)]
  double upper = 0.0;            // B(t), the unconditional upper bound
  double lower_general = 0.0;    // B^2 / A^{3/2 + eps}
  double lower_monotone = 0.0;   // sqrt(B), for nondecreasing b
  double local_lower = 0.0;      // min{ delta(t) B(t), sqrt(B(t)) }
  double asymptotic_type1 = 0.0; // zeta(3/2)/(4 sqrt(pi)) sqrt(B)
  double epsilon = 0.0;
  double c_g = 0.0;
};

inline BoundsReport bounds(const CoefficientModel& model, double r, double epsilon = 0.1,
                           double c_g = 2.5, const VarianceOptions& opts = {}) {
  if (!(epsilon > 0.0)) throw model_error("bounds: epsilon must be positive");
  if (!(c_g > 2.0)) throw model_error("bounds: C_G must exceed 2");
  double t = 2.0 * std::log(r);
  if (!(r > 0.0) || !(t < model.t_g)) throw model_error("bounds: need 2 log r < t_G");
  TiltedWindow w = tilted_window(model, t, opts.tail_eps, {opts.max_index});
  BoundsReport rep;
  rep.mean = w.mean;
  rep.upper = w.var;
  rep.epsilon = epsilon;
  rep.c_g = c_g;
  if (w.var > 0.0) {
    rep.lower_general =
        w.mean > 0.0 ? w.var * w.var / std::pow(w.mean, 1.5 + epsilon) : 0.0;
    rep.lower_monotone = std::sqrt(w.var);
    rep.local_lower = std::min(detail::delta_scale(w.var, c_g) * w.var, std::sqrt(w.var));
    rep.asymptotic_type1 = kTypeIConstant * std::sqrt(w.var);
  }
  return rep;
}

/// The near/far split of the variance integral at delta(t).
struct JSplitResult {
  double j1 = 0.0;     // (1/2pi) integral over |theta| <= delta
  double j2 = 0.0;     // complement
  double delta = 0.0;  // sqrt(C_G log B / B)
  bool delta_capped = false;  // delta >= pi: whole integral reported as j1
  QuadratureResult q1, q2;
};

inline JSplitResult j_split(const CoefficientModel& model, double r, double c_g = 2.5,
                            double rel_tol = 1e-9, const VarianceOptions& opts_in = {}) {
  if (!(c_g > 2.0)) throw model_error("j_split: C_G must exceed 2");
  double t = 2.0 * std::log(r);
  if (!(r > 0.0) || !(t < model.t_g)) throw model_error("j_split: need 2 log r < t_G");
  VarianceOptions opts = opts_in;
  opts.rel_tol = rel_tol;
  opts.c_g = c_g;
  TiltedWindow w = tilted_window(model, t, opts.tail_eps, {opts.max_index});
  JSplitResult res;
  if (w.var <= 0.0) {  // degenerate: nothing to split
    res.delta_capped = true;
    return res;
  }
  if (!(w.var > 1.0)) throw model_error("j_split: need B(t) > 1");
  res.delta = std::sqrt(c_g * std::log(w.var) / w.var);
  if (res.delta >= kPi) {
    res.q1 = detail::integrate_v(w, 0.0, kPi, opts);
    res.j1 = 2.0 * res.q1.value;
    res.delta_capped = true;
    return res;
  }
  res.q1 = detail::integrate_v(w, 0.0, res.delta, opts);
  res.q2 = detail::integrate_v(w, res.delta, kPi, opts);
  res.j1 = 2.0 * res.q1.value;
  res.j2 = 2.0 * res.q2.value;
  return res;
}

}  // namespace zfluct
