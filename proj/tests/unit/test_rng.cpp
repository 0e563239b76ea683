#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "gridweave/rng.hpp"

using gridweave::Rng;

TEST_CASE("same seed reproduces the stream, different seed diverges") {
  Rng a(42), b(42), c(43);
  bool all_equal = true;
  bool any_differ = false;
  for (int i = 0; i < 256; ++i) {
    const std::uint64_t va = a.next_u64();
    if (va != b.next_u64()) all_equal = false;
    if (va != c.next_u64()) any_differ = true;
  }
  CHECK(all_equal);
  CHECK(any_differ);
}

TEST_CASE("uniform01 stays in [0, 1) and fills the interval") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform respects its bounds") {
  Rng rng(9);
  for (int i = 0; i < 5000; ++i) {
    const double v = rng.uniform(2.5, 7.5);
    CHECK(v >= 2.5);
    CHECK(v < 7.5);
  }
}

TEST_CASE("log_uniform stays inside the bracket and spreads across decades") {
  Rng rng(11);
  int low_decade = 0, high_decade = 0;
  for (int i = 0; i < 20000; ++i) {
    const double v = rng.log_uniform(1e3, 1e9);
    CHECK(v >= 1e3);
    CHECK(v <= 1e9);
    if (v < 1e4) ++low_decade;
    if (v > 1e8) ++high_decade;
  }
  // Each decade carries 1/6 of the mass under a log-uniform draw.
  CHECK(low_decade > 2000);
  CHECK(high_decade > 2000);
}

TEST_CASE("exponential matches its mean roughly") {
  Rng rng(13);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.exponential(4.0);
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("normal has roughly zero mean and unit variance") {
  Rng rng(17);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("below covers every residue without going out of range") {
  Rng rng(19);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t v = rng.below(5);
    REQUIRE(v < 5);
    ++seen[static_cast<std::size_t>(v)];
  }
  for (int count : seen) CHECK(count > 500);
}
