#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "zfluct/detail/math.hpp"

namespace zfluct {

/// Result of an adaptive quadrature over one interval.
struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::int64_t evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_floor = 1e-300;        // convergence floor for identically-zero integrands
  std::int64_t max_evaluations = 1'000'000;
  std::vector<double> breakpoints;  // initial subdivision hints inside [a, b]
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK coefficients).
inline constexpr double kGK15X[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15WK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGK15WG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

inline Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    double fv;
    if (i == 7) {
      fv = f(c);
      kron += kGK15WK[7] * fv;
      gauss += kGK15WG[3] * fv;
    } else {
      double x = h * kGK15X[i];
      fv = f(c - x) + f(c + x);
      kron += kGK15WK[i] * fv;
      if (i % 2 == 1) gauss += kGK15WG[i / 2] * fv;
    }
  }
  kron *= h;
  gauss *= h;
  // QUADPACK-style error heuristic: sharpen |K - G| by the 1.5 power.
  double err = std::abs(kron - gauss);
  if (err > 0.0) err = std::pow(200.0 * err, 1.5) * 0.005;
  return {a, b, kron, err};
}

}  // namespace detail

/// Globally adaptive GK15 bisection on [a, b]. Refines the worst panel until
/// the accumulated error estimate drops below rel_tol relative to the running
/// value (or the evaluation budget runs out, reported as converged = false).
inline QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                           double b, const QuadratureOptions& opts = {}) {
  QuadratureResult res;
  if (!(a < b)) return res;

  std::vector<double> cuts{a};
  for (double x : opts.breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<detail::Panel> panels;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto p = detail::gk15(f, cuts[i], cuts[i + 1]);
    res.evaluations += 15;
    total += p.value;
    total_err += p.error;
    panels.push(p);
  }

  auto good_enough = [&] {
    return total_err <= std::max(opts.abs_floor, opts.rel_tol * std::abs(total));
  };

  while (!good_enough() && res.evaluations + 30 <= opts.max_evaluations && !panels.empty()) {
    detail::Panel worst = panels.top();
    panels.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval exhausted at machine precision
      total_err -= worst.error;
      continue;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    res.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  res.value = total;
  res.abs_error_estimate = total_err;
  res.converged = good_enough();
  return res;
}

}  // namespace zfluct
