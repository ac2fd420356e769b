#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "zfluct/coeff_model.hpp"
#include "zfluct/tilted_window.hpp"
#include "zfluct/zero_count.hpp"

namespace zfluct {

/// Monte Carlo estimates of the zero-count law in |z| <= r.
struct MCStats {
  std::int64_t samples = 0;       // successful counts
  std::int64_t failed_counts = 0;
  double mean = 0.0;
  double variance = 0.0;          // unbiased sample variance
  double mean_stderr = 0.0;
  double var_stderr = 0.0;        // jackknife standard error of the variance
};

struct MCOptions {
  double tail_eps = 1e-12;
  int threads = 1;                // never affects values, only speed
  double max_failure_rate = 1e-3;
  CountOptions count;
  std::int64_t max_index = 2'000'000;
};

namespace detail {

// Jackknife standard error of the unbiased sample variance: leave-one-out
// variances from the moment sums, O(n) total.
inline double jackknife_var_stderr(const std::vector<std::int64_t>& xs) {
  const std::size_t n = xs.size();
  if (n < 3) return 0.0;
  double s1 = 0.0, s2 = 0.0;
  for (std::int64_t x : xs) {
    s1 += static_cast<double>(x);
    s2 += static_cast<double>(x) * static_cast<double>(x);
  }
  const double nm1 = static_cast<double>(n - 1);
  std::vector<double> loo(n);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = static_cast<double>(xs[i]);
    double m = (s1 - x) / nm1;
    double v = (s2 - x * x - nm1 * m * m) / (nm1 - 1.0);
    loo[i] = v;
    loo_mean += v;
  }
  loo_mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  return std::sqrt(nm1 / static_cast<double>(n) * ss);
}

}  // namespace detail

/// Samples n_samples truncated polynomials of the model at t = 2 log r and
/// aggregates zero-count statistics. Per-sample results are pure functions of
/// (seed, index); aggregation runs in index order, so the result does not
/// depend on the number of worker threads.
inline MCStats mc_stats(const CoefficientModel& model, double r, std::int64_t n_samples,
                        std::uint64_t seed, const MCOptions& opts = {}) {
  if (n_samples < 100) throw model_error("mc_stats: need n_samples >= 100");
  double t = 2.0 * std::log(r);
  if (!(r > 0.0) || !(t < model.t_g)) throw model_error("mc_stats: need 2 log r < t_G");
  TiltedWindow w = tilted_window(model, t, opts.tail_eps, {opts.max_index});

  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_samples), -1);
  auto work = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      GafSample s = sample_coeffs(w, seed, i);
      ZeroCount zc = count_zeros_unit_disk(s, opts.count);
      counts[static_cast<std::size_t>(i)] = zc.ok ? zc.count : -1;
    }
  };
  int nthreads = std::max(1, opts.threads);
  if (nthreads == 1) {
    work(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    std::int64_t chunk = (n_samples + nthreads - 1) / nthreads;
    for (int k = 0; k < nthreads; ++k) {
      std::int64_t b = k * chunk, e = std::min<std::int64_t>(n_samples, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<std::int64_t> good;
  good.reserve(counts.size());
  MCStats st;
  for (std::int64_t c : counts) {
    if (c < 0)
      ++st.failed_counts;
    else
      good.push_back(c);
  }
  if (static_cast<double>(st.failed_counts) >
      opts.max_failure_rate * static_cast<double>(n_samples))
    throw numeric_error("mc_stats: " + std::to_string(st.failed_counts) + " of " +
                        std::to_string(n_samples) + " zero counts failed to stabilize");

  st.samples = static_cast<std::int64_t>(good.size());
  detail::KahanSum mean_sum;
  for (std::int64_t c : good) mean_sum.add(static_cast<double>(c));
  st.mean = mean_sum.value() / static_cast<double>(st.samples);
  detail::KahanSum var_sum;
  for (std::int64_t c : good) {
    double d = static_cast<double>(c) - st.mean;
    var_sum.add(d * d);
  }
  if (st.samples > 1) {
    st.variance = var_sum.value() / static_cast<double>(st.samples - 1);
    st.mean_stderr = std::sqrt(st.variance / static_cast<double>(st.samples));
    st.var_stderr = detail::jackknife_var_stderr(good);
  }
  return st;
}

}  // namespace zfluct
