#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zfluct/rng.hpp"

using namespace zfluct;

TEST_CASE("philox4x64-10 reference vectors") {
  // Frozen from an independent reference implementation of the generator.
  using philox::block;
  using philox::Counter;

  Counter a = block({1, 0, 0, 0}, {0, 0});
  REQUIRE(a[0] == 0x02f4ba6408e4d89bULL);
  REQUIRE(a[1] == 0x3dd62b0b9ca8c5b2ULL);
  REQUIRE(a[2] == 0x1c8667a55d902e79ULL);
  REQUIRE(a[3] == 0x907d7a052fd5b4dcULL);

  Counter b = block({2, 2, 3, 4}, {0xdeadbeefULL, 0x12345678ULL});
  REQUIRE(b[0] == 0xd2998438c39896c1ULL);
  REQUIRE(b[1] == 0x8883d7010eb424a8ULL);
  REQUIRE(b[2] == 0x878adbdbec41b8b4ULL);
  REQUIRE(b[3] == 0xc24945d81fe024fbULL);

  Counter c = block({0, 0, 0, 0}, {~0ULL, ~0ULL});
  REQUIRE(c[0] == 0x44b7493d1acfc229ULL);
  REQUIRE(c[1] == 0x6636af8e997921ddULL);
  REQUIRE(c[2] == 0x3f73e132b5b3780eULL);
  REQUIRE(c[3] == 0x605644dde03b01b1ULL);
}

TEST_CASE("complex gaussian stream is a pure function of (seed, index, n)") {
  double re1, im1, re2, im2;
  complex_gaussian(42, 7, 13, re1, im1);
  complex_gaussian(42, 7, 13, re2, im2);
  REQUIRE(re1 == re2);
  REQUIRE(im1 == im2);
  complex_gaussian(42, 7, 14, re2, im2);
  REQUIRE((re1 != re2 || im1 != im2));
  complex_gaussian(43, 7, 13, re2, im2);
  REQUIRE((re1 != re2 || im1 != im2));
}

TEST_CASE("complex gaussian moments") {
  const int n = 200000;
  double sum_re = 0.0, sum_im = 0.0, sum_sq = 0.0, sum_q = 0.0;
  for (int i = 0; i < n; ++i) {
    double re, im;
    complex_gaussian(987, static_cast<std::uint64_t>(i), 0, re, im);
    sum_re += re;
    sum_im += im;
    double s = re * re + im * im;
    sum_sq += s;
    sum_q += s * s;
  }
  // E xi = 0, E |xi|^2 = 1, E |xi|^4 = 2 for a standard complex gaussian
  double tol = 4.0 / std::sqrt(static_cast<double>(n));
  REQUIRE(std::abs(sum_re / n) < tol);
  REQUIRE(std::abs(sum_im / n) < tol);
  REQUIRE(sum_sq / n == Catch::Approx(1.0).margin(tol));
  REQUIRE(sum_q / n == Catch::Approx(2.0).margin(4.0 * tol));
}
