#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <vector>

#include "zfluct/coeff_model.hpp"
#include "zfluct/detail/math.hpp"

namespace zfluct {

/// The finite probability window of the tilted distribution
/// P[X_t = n] = a_n^2 e^{nt} / H(t), truncated so that the excluded mass is
/// certified to be at most tail_eps. The stored weights are renormalized to
/// sum to one (the window is itself a law); the certified truncation defect
/// lives in tail_mass_bound. Immutable after construction.
struct TiltedWindow {
  double t = 0.0;
  std::int64_t first = 0;        // lowest stored index
  std::vector<double> p;         // probabilities for n in [first, first + p.size())
  double log_h = 0.0;            // log H(t), window sum plus tail bound
  double tail_mass_bound = 0.0;  // certified bound on the excluded mass fraction

  // Moments of X_t, computed once at construction.
  double mean = 0.0;  // A(t)
  double var = 0.0;   // B(t)
  double mu3 = 0.0;
  double mu4 = 0.0;

  // gcd of support gaps: 1 for generic windows, d > 1 when the support lies
  // on an arithmetic progression (lacunary models), 0 for a single atom.
  std::int64_t lattice_gap = 0;
  double spread = 0.0;  // max |n - mean| over indices with positive mass
  std::vector<std::int64_t> atoms;  // indices with positive mass, ascending

  std::int64_t n_max() const { return first + static_cast<std::int64_t>(p.size()) - 1; }
  double prob(std::int64_t n) const {
    std::int64_t j = n - first;
    if (j < 0 || j >= static_cast<std::int64_t>(p.size())) return 0.0;
    return p[static_cast<std::size_t>(j)];
  }
};

/// Mean and variance of the tilted distribution.
struct WindowStats {
  double mean = 0.0;  // A(t) = a(e^t)
  double var = 0.0;   // B(t) = b(e^t)
};

inline WindowStats stats(const TiltedWindow& w) { return {w.mean, w.var}; }

struct WindowOptions {
  std::int64_t max_index = 2'000'000;  // resource guard
};

namespace detail {

// Largest maximizer of log a_n^2 + n*t together with its value. Dense models
// are assumed unimodal in n (true for every builtin family); models with
// explicit support are scanned.
inline std::pair<std::int64_t, double> argmax_term(const CoefficientModel& model, double t,
                                                   std::int64_t max_index) {
  if (model.has_support()) {
    std::int64_t best_n = -1;
    double best = kNegInf;
    for (std::int64_t n : *model.support) {
      double s = model.log_coeff(n) + static_cast<double>(n) * t;
      if (s >= best) {
        best = s;
        best_n = n;
      }
    }
    if (best_n < 0 || best == kNegInf) throw model_error("model has no finite coefficients");
    return {best_n, best};
  }
  auto step = [&](std::int64_t n) {
    return model.log_coeff(n + 1) - model.log_coeff(n) + t;
  };
  if (step(0) < 0) return {0, model.log_coeff(0)};
  std::int64_t hi = 1;
  while (step(hi) >= 0) {
    hi *= 2;
    if (hi > 2 * max_index)
      throw numeric_error("window exceeds configured maximum index while locating peak");
  }
  // first index with step < 0 in (hi/2, hi]
  std::int64_t lo = hi / 2;
  while (lo + 1 < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (step(mid) < 0)
      hi = mid;
    else
      lo = mid;
  }
  return {hi, model.log_coeff(hi) + static_cast<double>(hi) * t};
}

inline void finish_window(TiltedWindow& w) {
  KahanSum a;
  for (std::size_t j = 0; j < w.p.size(); ++j)
    a.add(static_cast<double>(w.first + static_cast<std::int64_t>(j)) * w.p[j]);
  w.mean = a.value();
  KahanSum b, m3, m4;
  for (std::size_t j = 0; j < w.p.size(); ++j) {
    double d = static_cast<double>(w.first + static_cast<std::int64_t>(j)) - w.mean;
    double d2 = d * d * w.p[j];
    b.add(d2);
    m3.add(d2 * d);
    m4.add(d2 * d * d);
  }
  w.var = b.value();
  w.mu3 = m3.value();
  w.mu4 = m4.value();

  std::int64_t g = 0, base = -1;
  double spread = 0.0;
  w.atoms.clear();
  for (std::size_t j = 0; j < w.p.size(); ++j) {
    if (w.p[j] <= 0.0) continue;
    std::int64_t n = w.first + static_cast<std::int64_t>(j);
    w.atoms.push_back(n);
    spread = std::max(spread, std::abs(static_cast<double>(n) - w.mean));
    if (base < 0)
      base = n;
    else
      g = gcd64(g, n - base);
  }
  w.lattice_gap = g;
  w.spread = spread;
  if (g == 0) w.var = w.mu3 = w.mu4 = 0.0;  // single atom
}

}  // namespace detail

/// Builds the tilted window at parameter t with certified tail mass
/// <= tail_eps. The window starts at the peak term and expands in both
/// directions until a one-sided geometric-domination bound certifies
/// tail_eps/2 of excluded mass per side.
inline TiltedWindow tilted_window(const CoefficientModel& model, double t, double tail_eps,
                                  const WindowOptions& opts = {}) {
  if (!(t < model.t_g)) throw model_error("t must be below t_G = log R_G");
  if (!(tail_eps > 0.0) || tail_eps >= 1e-6)
    throw model_error("tail_eps must lie in (0, 1e-6)");

  auto [peak, s_peak] = detail::argmax_term(model, t, opts.max_index);
  double half_eps = 0.5 * tail_eps;

  TiltedWindow w;
  w.t = t;

  if (model.has_support()) {
    // Finite support: compute every term, then trim exactly.
    const auto& sup = *model.support;
    if (static_cast<std::int64_t>(sup.size()) > opts.max_index)
      throw numeric_error("window exceeds configured maximum index");
    std::vector<double> u(sup.size());
    detail::KahanSum total;
    for (std::size_t j = 0; j < sup.size(); ++j) {
      double lc = model.log_coeff(sup[j]);
      u[j] = lc == kNegInf ? 0.0 : std::exp(lc + static_cast<double>(sup[j]) * t - s_peak);
      total.add(u[j]);
    }
    double S = total.value();
    std::size_t lo = 0, hi = sup.size() - 1;
    double cut_lo = 0.0, cut_hi = 0.0;
    while (lo < hi && cut_lo + u[lo] <= half_eps * S) cut_lo += u[lo++];
    while (hi > lo && cut_hi + u[hi] <= half_eps * S) cut_hi += u[hi--];
    double excluded = cut_lo + cut_hi;
    double kept = S - excluded;
    w.first = sup[lo];
    w.p.assign(static_cast<std::size_t>(sup[hi] - sup[lo]) + 1, 0.0);
    for (std::size_t j = lo; j <= hi; ++j)
      w.p[static_cast<std::size_t>(sup[j] - w.first)] = u[j] / kept;
    w.log_h = s_peak + std::log(S);
    w.tail_mass_bound = excluded / S;
    detail::finish_window(w);
    return w;
  }

  // Dense support: expand from the peak with per-side certificates.
  std::deque<double> u{1.0};
  std::int64_t n_lo = peak, n_hi = peak;
  detail::KahanSum sum;
  sum.add(1.0);

  auto term = [&](std::int64_t n) {
    double lc = model.log_coeff(n);
    return lc == kNegInf ? 0.0 : std::exp(lc + static_cast<double>(n) * t - s_peak);
  };

  double tail_hi = 0.0;
  for (;;) {
    double rho = std::exp(model.log_ratio_sup(n_hi) + t);
    if (rho < 1.0) {
      tail_hi = u.back() * rho / (1.0 - rho);
      if (tail_hi <= half_eps * sum.value()) break;
    }
    ++n_hi;
    if (n_hi > opts.max_index)
      throw numeric_error("window exceeds configured maximum index");
    u.push_back(term(n_hi));
    sum.add(u.back());
  }
  double tail_lo = 0.0;
  while (n_lo > 0) {
    double sigma = std::exp(-(model.log_ratio_inf(n_lo) + t));
    if (sigma < 1.0) {
      tail_lo = u.front() * sigma / (1.0 - sigma);
      if (tail_lo <= half_eps * sum.value()) break;
    }
    --n_lo;
    u.push_front(term(n_lo));
    sum.add(u.front());
    tail_lo = 0.0;
  }

  double S = sum.value();
  double T = tail_lo + tail_hi;
  w.first = n_lo;
  w.p.assign(u.begin(), u.end());
  for (double& x : w.p) x /= S;
  w.log_h = s_peak + std::log(S + T);
  w.tail_mass_bound = T / (S + T);
  detail::finish_window(w);
  return w;
}

/// Characteristic-function moments of the window:
///   phi(theta) = E[e^{i theta X_t}],  m(theta) = E[(X_t - A) e^{i theta X_t}].
inline std::pair<std::complex<double>, std::complex<double>> char_moments(
    const TiltedWindow& w, double theta) {
  detail::KahanSum phi_re, phi_im, m_re, m_im;
  for (std::int64_t n : w.atoms) {
    double pj = w.prob(n);
    double c = std::cos(static_cast<double>(n) * theta);
    double s = std::sin(static_cast<double>(n) * theta);
    double d = static_cast<double>(n) - w.mean;
    phi_re.add(pj * c);
    phi_im.add(pj * s);
    m_re.add(pj * d * c);
    m_im.add(pj * d * s);
  }
  return {{phi_re.value(), phi_im.value()}, {m_re.value(), m_im.value()}};
}

/// Wiman-Valiron diagnostics at radius r (the argument of G).
struct CentralIndexInfo {
  std::int64_t central_index = 0;  // N(r), largest maximizer of a_n^2 r^n
  double log_max_term = 0.0;       // log mu(r)
  double window_size = 0.0;        // K(r) = N^{(1+gamma)/2}
  double gamma = 0.0;
};

inline CentralIndexInfo central_index(const CoefficientModel& model, double r, double gamma,
                                      const WindowOptions& opts = {}) {
  if (!(r > 0.0) || !(std::log(r) < model.t_g))
    throw model_error("central_index: need 0 < r with log r < t_G");
  if (!(gamma > 0.0 && gamma < 0.5)) throw model_error("central_index: gamma in (0, 1/2)");
  auto [n, s] = detail::argmax_term(model, std::log(r), opts.max_index);
  CentralIndexInfo info;
  info.central_index = n;
  info.log_max_term = s;
  info.window_size = std::pow(static_cast<double>(n), 0.5 * (1.0 + gamma));
  info.gamma = gamma;
  return info;
}

}  // namespace zfluct
