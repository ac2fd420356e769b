#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zfluct/coeff_model.hpp"
#include "zfluct/tilted_window.hpp"

namespace zfluct {

/// The partition of the t-axis by B(t_ell) = ell^6, with the long/short
/// interval classification. T_ell = [t_ell, t_{ell+1}] is long when
/// |T_ell| >= 8/ell^2; its interior trims 2/ell^2 from each end.
struct IntervalPartition {
  std::int64_t ell_min = 1;
  std::int64_t ell_max = 1;
  std::vector<double> t;  // t[ell - ell_min] for ell in [ell_min, ell_max + 1]

  double t_ell(std::int64_t ell) const { return t[static_cast<std::size_t>(ell - ell_min)]; }
  double length(std::int64_t ell) const { return t_ell(ell + 1) - t_ell(ell); }
  bool is_long(std::int64_t ell) const {
    return length(ell) >= 8.0 / (static_cast<double>(ell) * static_cast<double>(ell));
  }
  std::optional<std::pair<double, double>> interior(std::int64_t ell) const {
    if (!is_long(ell)) return std::nullopt;
    double pad = 2.0 / (static_cast<double>(ell) * static_cast<double>(ell));
    return std::make_pair(t_ell(ell) + pad, t_ell(ell + 1) - pad);
  }
  bool in_some_interior(double tv) const {
    for (std::int64_t ell = ell_min; ell <= ell_max; ++ell)
      if (auto i = interior(ell); i && tv >= i->first && tv <= i->second) return true;
    return false;
  }
};

struct PartitionOptions {
  double tail_eps = 1e-14;
  double target_rel_tol = 1e-10;  // |B(t_ell) - ell^6| / ell^6
  int max_bisection_steps = 200;
  double t_cap = 600.0;           // bracket growth limit (entire models)
  std::int64_t max_index = 2'000'000;
};

namespace detail {

inline double window_var_at(const CoefficientModel& model, double t,
                            const PartitionOptions& opts) {
  return tilted_window(model, t, opts.tail_eps, {opts.max_index}).var;
}

// Solves B(t) = target by bracketed bisection, assuming B nondecreasing.
// A window blow-up during probing is read as B(t) already above target.
inline double solve_b_equals(const CoefficientModel& model, double target, double lo_hint,
                             const PartitionOptions& opts) {
  auto eval = [&](double t) -> double {
    try {
      return window_var_at(model, t, opts);
    } catch (const numeric_error&) {
      return kInf;
    }
  };
  const bool entire = !(model.t_g < kInf);

  double lo = lo_hint;
  while (eval(lo) > target) {
    lo = entire ? (lo <= 0.0 ? (lo == 0.0 ? -1.0 : 2.0 * lo) : 0.0) : 2.0 * lo;
    if ((entire && lo < -opts.t_cap) || (!entire && lo < -opts.t_cap))
      throw model_error("interval_partition: cannot bracket B(t) = target from below");
  }
  double hi;
  if (entire) {
    hi = std::max(1.0, lo + 1.0);
    while (eval(hi) < target) {
      hi *= 2.0;
      if (hi > opts.t_cap)
        throw model_error("interval_partition: B(t) stays below " + std::to_string(target) +
                          " up to the probe cap; B appears bounded");
    }
  } else {
    hi = 0.5 * lo;  // lo < 0, approach t_G = 0 from the left
    while (eval(hi) < target) {
      hi *= 0.5;
      if (hi > -1e-15)
        throw model_error("interval_partition: B(t) stays below " + std::to_string(target) +
                          " approaching t_G; B appears bounded");
    }
  }

  for (int i = 0; i < opts.max_bisection_steps; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double b = eval(mid);
    if (std::isfinite(b) && std::abs(b - target) <= opts.target_rel_tol * target) return mid;
    if (b < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Solves t_ell for B(t_ell) = ell^6, ell = 1 .. ell_max + 1, and verifies
/// numerically that B is nondecreasing across the solved range.
inline IntervalPartition interval_partition(const CoefficientModel& model, std::int64_t ell_max,
                                            const PartitionOptions& opts = {}) {
  if (ell_max < 2) throw model_error("interval_partition: need ell_max >= 2");
  IntervalPartition part;
  part.ell_min = 1;
  part.ell_max = ell_max;
  double lo_hint = model.t_g < kInf ? -1.0 : 0.0;
  for (std::int64_t ell = 1; ell <= ell_max + 1; ++ell) {
    double target = std::pow(static_cast<double>(ell), 6.0);
    double tl = detail::solve_b_equals(model, target, lo_hint, opts);
    part.t.push_back(tl);
    lo_hint = tl;
  }
  // monotonicity audit over the solved range
  double prev = -kInf;
  const int grid = 32;
  for (int i = 0; i <= grid; ++i) {
    double tv = part.t.front() +
                (part.t.back() - part.t.front()) * static_cast<double>(i) / grid;
    double b = detail::window_var_at(model, tv, opts);
    if (b < prev * (1.0 - 1e-9))
      throw model_error("interval_partition: B(t) is not nondecreasing on the probed range");
    prev = b;
  }
  for (std::size_t i = 0; i + 1 < part.t.size(); ++i)
    if (!(part.t[i] < part.t[i + 1]))
      throw model_error("interval_partition: t_ell sequence is not increasing");
  return part;
}

/// The lacunary keep-mask: per block ell, the indices in
/// [A(t_ell), A(t_{ell+1})) that are multiples of p_ell = ell^3.
struct RestrictionPlan {
  std::int64_t ell_min = 2;
  std::int64_t ell_max = 2;
  double c1 = 20.0;
  std::vector<std::int64_t> p_ell;                            // ell^3
  std::vector<double> s_ell;                                  // c1 sqrt(log ell)
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;  // [lo, hi) per ell
  std::shared_ptr<const std::vector<std::int64_t>> kept;      // sorted union

  bool keeps(std::int64_t n) const {
    return std::binary_search(kept->begin(), kept->end(), n);
  }
};

struct RestrictOptions {
  std::int64_t ell_min = 2;  // the construction drops finitely many leading blocks
  double c1 = 20.0;          // requires c1 > 8 sqrt(6) ~ 19.6; diagnostics only
  double tail_eps = 1e-12;
  std::int64_t max_index = 2'000'000;
};

inline RestrictionPlan make_plan(const CoefficientModel& model, const IntervalPartition& part,
                                 const RestrictOptions& opts = {}) {
  if (opts.ell_min < part.ell_min || opts.ell_min > part.ell_max)
    throw model_error("make_plan: ell_min outside the partition range");
  RestrictionPlan plan;
  plan.ell_min = opts.ell_min;
  plan.ell_max = part.ell_max;
  plan.c1 = opts.c1;
  auto kept = std::make_shared<std::vector<std::int64_t>>();
  for (std::int64_t ell = opts.ell_min; ell <= part.ell_max; ++ell) {
    double a_lo = tilted_window(model, part.t_ell(ell), opts.tail_eps, {opts.max_index}).mean;
    double a_hi =
        tilted_window(model, part.t_ell(ell + 1), opts.tail_eps, {opts.max_index}).mean;
    std::int64_t lo = std::llround(a_lo), hi = std::llround(a_hi);
    std::int64_t p = ell * ell * ell;
    std::int64_t firstm = (lo + p - 1) / p * p;
    if (firstm >= hi)
      throw model_error("make_plan: block ell = " + std::to_string(ell) +
                        " contains no multiple of " + std::to_string(p));
    plan.p_ell.push_back(p);
    plan.s_ell.push_back(opts.c1 * std::sqrt(std::log(static_cast<double>(ell))));
    plan.ranges.emplace_back(lo, hi);
    for (std::int64_t n = firstm; n < hi; n += p) kept->push_back(n);
  }
  plan.kept = kept;
  return plan;
}

inline CoefficientModel apply_plan(const CoefficientModel& model, const RestrictionPlan& plan) {
  return restrict_to_support(model, *plan.kept);
}

/// The lacunary construction in one step: the restricted covariance plus the
/// plan that produced it.
inline std::pair<CoefficientModel, RestrictionPlan> restrict(const CoefficientModel& model,
                                                             const IntervalPartition& part,
                                                             const RestrictOptions& opts = {}) {
  RestrictionPlan plan = make_plan(model, part, opts);
  return {apply_plan(model, plan), plan};
}

/// Per-t similarity diagnostics A_restricted/A and B_restricted/B; rows with
/// t outside every interior are flagged (the similarity comparison is only
/// meaningful on the normal set).
struct SimilarityRow {
  double t = 0.0;
  double a_ratio = 0.0;
  double b_ratio = 0.0;
  bool in_interior = false;
};

inline std::vector<SimilarityRow> similarity_report(const CoefficientModel& model,
                                                    const CoefficientModel& restricted,
                                                    const std::vector<double>& ts,
                                                    const IntervalPartition& part,
                                                    double tail_eps = 1e-12) {
  std::vector<SimilarityRow> rows;
  rows.reserve(ts.size());
  for (double tv : ts) {
    TiltedWindow base = tilted_window(model, tv, tail_eps);
    TiltedWindow res = tilted_window(restricted, tv, tail_eps);
    SimilarityRow row;
    row.t = tv;
    row.a_ratio = base.mean > 0.0 ? res.mean / base.mean : kInf;
    row.b_ratio = base.var > 0.0 ? res.var / base.var : kInf;
    row.in_interior = part.in_some_interior(tv);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace zfluct
