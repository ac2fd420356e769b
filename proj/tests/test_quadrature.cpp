#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zfluct/quadrature.hpp"

using namespace zfluct;

TEST_CASE("GK15 panel integrates smooth functions to near machine precision") {
  QuadratureOptions opts;
  opts.rel_tol = 1e-12;
  SECTION("polynomial") {
    auto q = integrate_adaptive([](double x) { return x * x * x * x; }, 0.0, 1.0, opts);
    REQUIRE(q.converged);
    REQUIRE(q.value == Catch::Approx(0.2).epsilon(1e-14));
  }
  SECTION("sine over a half period") {
    auto q = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, kPi, opts);
    REQUIRE(q.converged);
    REQUIRE(q.value == Catch::Approx(2.0).epsilon(1e-13));
  }
  SECTION("narrow gaussian needs refinement but converges") {
    auto q = integrate_adaptive([](double x) { return std::exp(-1e4 * x * x); }, -1.0, 1.0, opts);
    REQUIRE(q.converged);
    REQUIRE(q.value == Catch::Approx(std::sqrt(kPi) / 100.0).epsilon(1e-11));
  }
}

TEST_CASE("breakpoint seeding and budget exhaustion") {
  auto spike = [](double x) { return 1.0 / (1e-12 + (x - 0.7) * (x - 0.7)); };
  QuadratureOptions tight;
  tight.rel_tol = 1e-10;
  tight.max_evaluations = 120;  // far too few for the spike
  auto q = integrate_adaptive(spike, 0.0, 1.0, tight);
  REQUIRE_FALSE(q.converged);

  QuadratureOptions seeded;
  seeded.rel_tol = 1e-9;
  seeded.breakpoints = {0.7 - 1e-5, 0.7, 0.7 + 1e-5};
  auto q2 = integrate_adaptive(spike, 0.0, 1.0, seeded);
  REQUIRE(q2.converged);
  // oracle: arctan antiderivative
  double s = 1e-6;
  double exact = (std::atan(0.3 / s) - std::atan(-0.7 / s)) / s;
  REQUIRE(q2.value == Catch::Approx(exact).epsilon(1e-8));
}

namespace {

// Euler-Maclaurin tail for zeta(s): sum_{n<=N} n^-s + N^{1-s}/(s-1) - N^-s/2
// + s N^{-s-1}/12.
double zeta_euler_maclaurin(double s, int n_terms) {
  double sum = 0.0;
  for (int n = n_terms; n >= 1; --n) sum += std::pow(n, -s);
  double nn = n_terms;
  return sum + std::pow(nn, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(nn, -s) +
         s / 12.0 * std::pow(nn, -s - 1.0);
}

}  // namespace

TEST_CASE("the frozen zeta(3/2) constant") {
  double oracle = zeta_euler_maclaurin(1.5, 200000);
  REQUIRE(kZeta32 == Catch::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("integral of u^2/(e^{u^2}-1) equals sqrt(pi)/2 zeta(3/2)") {
  // This is the limit shape of the near-origin variance integral; it ties the
  // GK coefficients and the frozen constant together.
  auto f = [](double u) {
    double x = u * u;
    if (x < 1e-8) return 1.0 - 0.5 * x;  // x/(e^x - 1) ~ 1 - x/2
    return x / std::expm1(x);
  };
  QuadratureOptions opts;
  opts.rel_tol = 1e-12;
  auto q = integrate_adaptive(f, 0.0, 40.0, opts);
  REQUIRE(q.converged);
  REQUIRE(2.0 * q.value == Catch::Approx(std::sqrt(kPi) / 2.0 * kZeta32).epsilon(1e-12));
}
