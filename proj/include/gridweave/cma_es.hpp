#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace gridweave {

/// Options for the generic covariance-matrix-adaptation minimizer. Bounds are
/// optional; when given, candidates are resampled into the box (up to
/// resample_cap draws) and clamped as a last resort.
struct CmaOptions {
  int population = 0;  // 0 -> 4 + floor(3 ln n)
  int max_generations = 100;
  std::uint64_t seed = 0;
  double sigma0 = 0.3;
  std::vector<double> lower;  // empty = unbounded below
  std::vector<double> upper;  // empty = unbounded above
  double tol_f = 0.0;         // stop once best-ever f <= tol_f (0 disables)
  int resample_cap = 100;
};

struct CmaResult {
  std::vector<double> best_x;
  double best_f = 0.0;
  int generations_run = 0;
  std::int64_t evaluations = 0;  // includes the initial-point evaluation
};

/// Weighted-recombination evolution strategy with cumulative step-size
/// adaptation and rank-one plus rank-mu covariance updates. The starting
/// point is evaluated first and competes for best-ever. Deterministic per
/// seed.
CmaResult cma_es_minimize(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const CmaOptions& options);

}  // namespace gridweave
