#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace zfluct {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// zeta(3/2), frozen to 16 digits; validated against an Euler-Maclaurin
// evaluation in the test suite.
inline constexpr double kZeta32 = 2.612375348685488;

// zeta(3/2) / (4 sqrt(pi)): the coefficient of sqrt(b(r^2)) in the
// type-I variance asymptotic.
inline const double kTypeIConstant = kZeta32 / (4.0 * std::sqrt(kPi));

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

// Neumaier compensated accumulator.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(sum exp(x_i)) over a span; -inf entries are skipped.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs)
    if (x > m) m = x;
  if (!std::isfinite(m)) return kNegInf;
  KahanSum s;
  for (double x : xs)
    if (x != kNegInf) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  while (b != 0) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

}  // namespace detail
}  // namespace zfluct
