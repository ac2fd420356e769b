#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zfluct/detail/math.hpp"

namespace zfluct {

// Thrown for invalid model/config inputs (CLI maps these to exit 2).
struct model_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a computation cannot be completed (CLI maps these to exit 3).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A covariance function G(z) = sum a_n^2 z^n, represented through the
/// log-coefficient sequence n -> log a_n^2 (-inf encodes a_n = 0).
///
/// For infinite-support families the two ratio-bound callbacks certify the
/// geometric decay used by the window builder:
///   log_ratio_sup(n) >= log a_{k+1}^2 - log a_k^2  for all k >= n
///   log_ratio_inf(n) <= log a_{k+1}^2 - log a_k^2  for all 0 <= k < n
/// Finite/lacunary models carry their support explicitly instead.
struct CoefficientModel {
  std::string family;
  std::map<std::string, double> params;
  double t_g = kInf;  // log R_G, either 0 or +inf

  std::function<double(std::int64_t)> log_coeff;
  std::function<double(std::int64_t)> log_ratio_sup;
  std::function<double(std::int64_t)> log_ratio_inf;
  std::shared_ptr<const std::vector<std::int64_t>> support;  // sorted, optional

  // Closed-form a(x), b(x) at x = e^t when the family has one; used by tests.
  std::function<double(double)> ref_mean;
  std::function<double(double)> ref_var;

  bool has_support() const { return support != nullptr; }
};

namespace detail {

// Lazily extended, mutex-guarded cache for expensive coefficient sequences.
class MemoSeq {
 public:
  explicit MemoSeq(std::function<void(std::vector<double>&, std::size_t)> extend)
      : extend_(std::move(extend)) {}

  double at(std::int64_t n) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (static_cast<std::size_t>(n) >= vals_.size())
      extend_(vals_, static_cast<std::size_t>(n) + 1);
    return vals_[static_cast<std::size_t>(n)];
  }

 private:
  std::function<void(std::vector<double>&, std::size_t)> extend_;
  mutable std::mutex mu_;
  mutable std::vector<double> vals_;
};

// log(sum_{k>=1} k^n / k!), the Dobinski-type sum behind e^{e^z}. The terms
// are unimodal in k, so locate the peak by bisection and sum outward until
// the contributions fall 45 nats below it.
inline double log_dobinski(std::int64_t n) {
  if (n == 0) return 1.0;  // sum is e
  auto term = [n](std::int64_t k) {
    return static_cast<double>(n) * std::log(static_cast<double>(k)) -
           std::lgamma(static_cast<double>(k) + 1.0);
  };
  auto rising = [&](std::int64_t k) { return term(k + 1) - term(k) >= 0.0; };
  std::int64_t hi = 1;
  while (rising(hi)) hi *= 2;
  std::int64_t lo = hi / 2;
  while (lo + 1 < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (rising(mid))
      lo = mid;
    else
      hi = mid;
  }
  const std::int64_t k_star = hi;
  const double peak = term(k_star);
  KahanSum s;
  s.add(1.0);
  for (std::int64_t k = k_star + 1;; ++k) {
    double d = term(k) - peak;
    if (d < -45.0) break;
    s.add(std::exp(d));
  }
  for (std::int64_t k = k_star - 1; k >= 1; --k) {
    double d = term(k) - peak;
    if (d < -45.0) break;
    s.add(std::exp(d));
  }
  return peak + std::log(s.value());
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw model_error(msg);
}

inline double get_param(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  require(it != p.end(), "missing parameter '" + key + "'");
  return it->second;
}

}  // namespace detail

/// Parses the coefficient file format: one `n<TAB>log_a_sq` record per line,
/// n strictly increasing, `#` starts a comment. Missing n means a_n = 0.
inline CoefficientModel load_coefficient_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw model_error("cannot open coefficient file: " + path);
  auto idx = std::make_shared<std::vector<std::int64_t>>();
  auto val = std::make_shared<std::vector<double>>();
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::int64_t n;
    double lc;
    if (!(ss >> n)) continue;  // blank line
    if (!(ss >> lc))
      throw model_error("parse error in " + path + " line " + std::to_string(lineno));
    if (n < 0 || (!idx->empty() && n <= idx->back()))
      throw model_error("indices must be nonnegative and strictly increasing: " + path +
                        " line " + std::to_string(lineno));
    if (lc == kNegInf) continue;  // explicit zero coefficient
    idx->push_back(n);
    val->push_back(lc);
  }
  if (idx->empty()) throw model_error("no coefficients in " + path);

  CoefficientModel m;
  m.family = "file";
  m.t_g = kInf;
  m.support = idx;
  m.log_coeff = [idx, val](std::int64_t n) {
    auto it = std::lower_bound(idx->begin(), idx->end(), n);
    if (it == idx->end() || *it != n) return kNegInf;
    return (*val)[static_cast<std::size_t>(it - idx->begin())];
  };
  return m;
}

/// Writes a model with explicit support in the coefficient file format.
inline void save_coefficient_file(const CoefficientModel& m, const std::string& path) {
  if (!m.has_support()) throw model_error("model has no explicit support to export");
  std::ofstream out(path);
  if (!out) throw model_error("cannot write coefficient file: " + path);
  out << "# coefficient file: n<TAB>log_a_sq\n";
  out.precision(17);
  for (std::int64_t n : *m.support) {
    double lc = m.log_coeff(n);
    if (lc == kNegInf) continue;
    out << n << '\t' << lc << '\n';
  }
  if (!out) throw model_error("write failed: " + path);
}

/// Builds one of the builtin coefficient families.
///
/// Tags: exp, mittag_leffler(alpha), double_exp, lindelof(alpha),
/// unit_disk_exp(alpha), hyperbolic(L), two_term(n,m,a_n,a_m), monomial(k),
/// file(path via params? -- use load_coefficient_file directly).
inline CoefficientModel make_family(const std::string& name,
                                    const std::map<std::string, double>& params = {}) {
  using detail::get_param;
  using detail::require;
  CoefficientModel m;
  m.family = name;
  m.params = params;
  m.t_g = kInf;

  if (name == "exp") {
    // G(z) = e^z, a_n^2 = 1/n!; a(x) = x, b(x) = x.
    m.log_coeff = [](std::int64_t n) { return -std::lgamma(static_cast<double>(n) + 1.0); };
    auto dl = [](std::int64_t n) { return -std::log(static_cast<double>(n) + 1.0); };
    m.log_ratio_sup = dl;
    m.log_ratio_inf = [dl](std::int64_t n) { return dl(n - 1); };
    m.ref_mean = [](double x) { return x; };
    m.ref_var = [](double x) { return x; };
    return m;
  }

  if (name == "mittag_leffler") {
    double alpha = get_param(params, "alpha");
    require(alpha > 0, "mittag_leffler: alpha must be positive");
    // a_n^2 = 1/Gamma(1 + n/alpha)
    auto lc = [alpha](std::int64_t n) {
      return -std::lgamma(1.0 + static_cast<double>(n) / alpha);
    };
    m.log_coeff = lc;
    auto dl = [lc](std::int64_t n) { return lc(n + 1) - lc(n); };
    m.log_ratio_sup = dl;
    m.log_ratio_inf = [dl](std::int64_t n) { return dl(n - 1); };
    return m;
  }

  if (name == "double_exp") {
    // G(z) = e^{e^z}, a_n^2 = (1/n!) sum_k k^n/k!; a(x) = x e^x,
    // b(x) = x(x+1) e^x.
    auto lc = [](std::int64_t n) {
      return detail::log_dobinski(n) - std::lgamma(static_cast<double>(n) + 1.0);
    };
    m.log_coeff = lc;
    auto dl = [lc](std::int64_t n) { return lc(n + 1) - lc(n); };
    m.log_ratio_sup = dl;  // ratio sequence is nonincreasing (checked in tests)
    m.log_ratio_inf = [dl](std::int64_t n) { return dl(n - 1); };
    m.ref_mean = [](double x) { return x * std::exp(x); };
    m.ref_var = [](double x) { return x * (x + 1.0) * std::exp(x); };
    return m;
  }

  if (name == "lindelof") {
    double alpha = get_param(params, "alpha");
    require(alpha > 0, "lindelof: alpha must be positive");
    // a_n^2 = 1 / log^{alpha n}(n + e)
    auto lc = [alpha](std::int64_t n) {
      return -alpha * static_cast<double>(n) *
             std::log(std::log(static_cast<double>(n) + std::exp(1.0)));
    };
    m.log_coeff = lc;
    auto dl = [lc](std::int64_t n) { return lc(n + 1) - lc(n); };
    m.log_ratio_sup = dl;
    m.log_ratio_inf = [dl](std::int64_t n) { return dl(n - 1); };
    return m;
  }

  if (name == "unit_disk_exp") {
    double alpha = get_param(params, "alpha");
    require(alpha > 0, "unit_disk_exp: alpha must be positive");
    m.t_g = 0.0;
    // G(z) = exp((1-z)^{-alpha}); coefficients from G' = G * alpha (1-z)^{-alpha-1},
    // accumulated in log space:
    //   (n+1) g_{n+1} = sum_{k<=n} u_k g_{n-k},  u_k = alpha binom(alpha+k, k).
    auto memo = std::make_shared<detail::MemoSeq>(
        [alpha](std::vector<double>& v, std::size_t upto) {
          if (v.empty()) v.push_back(1.0);  // g_0 = e
          std::vector<double> terms;
          for (std::size_t n1 = v.size(); n1 < upto; ++n1) {
            std::size_t n = n1 - 1;
            terms.clear();
            for (std::size_t k = 0; k <= n; ++k) {
              double log_u = std::log(alpha) + std::lgamma(alpha + 1.0 + k) -
                             std::lgamma(alpha + 1.0) - std::lgamma(static_cast<double>(k) + 1.0);
              terms.push_back(log_u + v[n - k]);
            }
            v.push_back(detail::log_sum_exp(terms) - std::log(static_cast<double>(n1)));
          }
        });
    auto lc = [memo](std::int64_t n) { return memo->at(n); };
    m.log_coeff = lc;
    // The ratio sequence settles into a monotone decrease only past a short
    // head (checked in tests), so scan the head when the query touches it.
    const std::int64_t head = 64;
    auto dl = [lc](std::int64_t n) { return lc(n + 1) - lc(n); };
    m.log_ratio_sup = [dl, head](std::int64_t n) {
      double best = dl(n);
      for (std::int64_t k = n + 1; k <= head; ++k) best = std::max(best, dl(k));
      return best;
    };
    m.log_ratio_inf = [dl, head](std::int64_t n) {
      double worst = dl(n - 1);
      for (std::int64_t k = std::min(n - 1, head); k >= 0; --k)
        worst = std::min(worst, dl(k));
      return worst;
    };
    m.ref_mean = [alpha](double x) { return alpha * x / std::pow(1.0 - x, alpha + 1.0); };
    m.ref_var = [alpha](double x) {
      return alpha * x / std::pow(1.0 - x, alpha + 1.0) +
             alpha * (alpha + 1.0) * x * x / std::pow(1.0 - x, alpha + 2.0);
    };
    return m;
  }

  if (name == "hyperbolic") {
    double L = get_param(params, "L");
    require(L > 0, "hyperbolic: L must be positive");
    m.t_g = 0.0;
    // G(z) = (1-z)^{-L}, a_n^2 = Gamma(L+n) / (Gamma(L) n!)
    m.log_coeff = [L](std::int64_t n) {
      return std::lgamma(L + static_cast<double>(n)) - std::lgamma(L) -
             std::lgamma(static_cast<double>(n) + 1.0);
    };
    auto dl = [L](std::int64_t n) {
      return std::log((static_cast<double>(n) + L) / (static_cast<double>(n) + 1.0));
    };
    // dl is monotone: decreasing for L >= 1, increasing toward 0 for L < 1.
    m.log_ratio_sup = [dl, L](std::int64_t n) { return L >= 1.0 ? dl(n) : 0.0; };
    m.log_ratio_inf = [dl, L](std::int64_t n) { return L >= 1.0 ? dl(n - 1) : dl(0); };
    m.ref_mean = [L](double x) { return L * x / (1.0 - x); };
    m.ref_var = [L](double x) { return L * x / ((1.0 - x) * (1.0 - x)); };
    return m;
  }

  if (name == "two_term") {
    auto n = static_cast<std::int64_t>(get_param(params, "n"));
    auto mm = static_cast<std::int64_t>(get_param(params, "m"));
    double an = get_param(params, "a_n");
    double am = get_param(params, "a_m");
    require(n >= 0 && mm > n, "two_term: need 0 <= n < m");
    require(an > 0 && am > 0, "two_term: amplitudes must be positive");
    auto sup = std::make_shared<std::vector<std::int64_t>>(std::vector<std::int64_t>{n, mm});
    m.support = sup;
    double ln = 2.0 * std::log(an), lm = 2.0 * std::log(am);
    m.log_coeff = [n, mm, ln, lm](std::int64_t k) {
      if (k == n) return ln;
      if (k == mm) return lm;
      return kNegInf;
    };
    double w = am * am / (an * an);
    double gap = static_cast<double>(mm - n);
    m.ref_mean = [n, w, gap](double x) {
      double q = w * std::pow(x, gap);
      return static_cast<double>(n) + gap * q / (1.0 + q);
    };
    m.ref_var = [w, gap](double x) {
      double q = w * std::pow(x, gap);
      return gap * gap * q / ((1.0 + q) * (1.0 + q));
    };
    return m;
  }

  if (name == "monomial") {
    auto k = static_cast<std::int64_t>(get_param(params, "k"));
    require(k >= 0, "monomial: k must be nonnegative");
    auto sup = std::make_shared<std::vector<std::int64_t>>(std::vector<std::int64_t>{k});
    m.support = sup;
    m.log_coeff = [k](std::int64_t n) { return n == k ? 0.0 : kNegInf; };
    m.ref_mean = [k](double) { return static_cast<double>(k); };
    m.ref_var = [](double) { return 0.0; };
    return m;
  }

  if (name == "file")
    throw model_error("family 'file' takes a path: use load_coefficient_file");
  throw model_error("unknown family tag: " + name);
}

/// Taylor-series restriction of a model: keeps log_coeff on `kept`, -inf
/// elsewhere. `kept` must be sorted.
inline CoefficientModel restrict_to_support(const CoefficientModel& base,
                                            std::vector<std::int64_t> kept) {
  if (kept.empty()) throw model_error("restriction keeps no indices");
  CoefficientModel m;
  m.family = "restricted:" + base.family;
  m.params = base.params;
  m.t_g = base.t_g;
  auto sup = std::make_shared<std::vector<std::int64_t>>(std::move(kept));
  m.support = sup;
  auto base_lc = base.log_coeff;
  m.log_coeff = [sup, base_lc](std::int64_t n) {
    auto it = std::lower_bound(sup->begin(), sup->end(), n);
    if (it == sup->end() || *it != n) return kNegInf;
    return base_lc(n);
  };
  return m;
}

}  // namespace zfluct
