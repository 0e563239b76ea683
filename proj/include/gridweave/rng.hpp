#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gridweave {

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is pinned by the standard; the distributions are implemented here
/// because std::*_distribution output is implementation-defined and would make
/// runs differ across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

  /// Uniform double in [low, high).
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  /// Log-uniform draw over [low, high]; requires low > 0.
  double log_uniform(double low, double high) {
    return std::exp(uniform(std::log(low), std::log(high)));
  }

  /// Exponential with the given mean; uses 1-u so the argument never hits 0.
  double exponential(double mean) { return -mean * std::log(1.0 - uniform01()); }

  /// Standard normal via Box-Muller. One value per call; the mate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n); n must be positive. Rejection-free modulo is
  /// avoided to keep the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gridweave
