#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "sradam/rng.hpp"

using namespace sradam;

TEST_CASE("rng is deterministic for a fixed seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64());
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("child streams are independent of parent consumption order") {
  Rng a(99), b(99);
  auto ca = a.child(5);
  (void)b.next_u64();  // advancing the parent must not affect children
  auto cb = b.child(5);
  CHECK(ca.next_u64() == cb.next_u64());
}

TEST_CASE("string-tagged children differ by tag") {
  Rng r(123);
  auto c1 = r.child("init");
  auto c2 = r.child("shuffle:0");
  CHECK(c1.next_u64() != c2.next_u64());
  // Same tag gives the same stream.
  auto c3 = r.child("init");
  Rng c1b = Rng(123).child("init");
  (void)c3;
  CHECK(c1b.next_u64() == Rng(123).child("init").next_u64());
}

TEST_CASE("inverse normal cdf hits known quantiles") {
  // Reference values to 1e-6 (standard normal quantiles).
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963985).epsilon(1e-6));
  CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.959963985).epsilon(1e-6));
  CHECK(inverse_normal_cdf(0.84134474606854293) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(inverse_normal_cdf(0.99865010196836999) ==
        doctest::Approx(3.0).epsilon(1e-6));
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::invalid_argument);
}

TEST_CASE("normal variates have the right first two moments") {
  Rng r(2024);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);       // se ~ 0.003
  CHECK(std::fabs(var - 1.0) < 0.03);  // se ~ 0.0045
}

TEST_CASE("gauss_vec applies mean and scale") {
  Rng r(5);
  auto v = gauss_vec(r, 100000, 0.7, 2.0);
  double s = 0.0, s2 = 0.0;
  for (double x : v.values()) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  CHECK(std::fabs(mean - 0.7) < 0.03);
  CHECK(std::fabs(sd - 2.0) < 0.04);
}

TEST_CASE("gauss_vec with zero std is exact and consumes no randomness") {
  Rng r(11);
  const auto before = r;
  auto v = gauss_vec(r, 4, 3.25, 0.0);
  for (double x : v.values()) CHECK(x == 3.25);
  Rng after = r;
  Rng ref = before;
  CHECK(after.next_u64() == ref.next_u64());
  CHECK_THROWS_AS(gauss_vec(r, 0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_vec(r, 3, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("fnv1a64 matches published test vectors") {
  // Classic FNV-1a 64-bit reference values.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}
