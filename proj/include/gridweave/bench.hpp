#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gridweave/platform.hpp"

namespace gridweave {

struct BenchRow {
  int sites = 0;
  std::int64_t jobs = 0;
  double runtime_s_min = 0.0;
  double runtime_s_median = 0.0;
  double runtime_s_max = 0.0;
};

/// Synthetic platform used by the scaling sweeps: uniform sites with plenty of
/// cores, so runtime scales with event volume rather than queue pathology.
PlatformSpec make_bench_platform(int n_sites);

/// Wall-clock the simulator over 1..max_sites sites at a fixed jobs-per-site
/// count. Each configuration reuses one generated trace across `repeats` timed
/// runs.
std::vector<BenchRow> run_site_sweep(int max_sites, int jobs_per_site, int repeats,
                                     std::uint64_t seed);

/// Wall-clock the simulator on one site as the job count grows from min_jobs
/// to max_jobs in steps.
std::vector<BenchRow> run_job_sweep(std::int64_t min_jobs, std::int64_t max_jobs,
                                    std::int64_t step, int repeats, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy);

/// `sites,jobs,runtime_s_min,runtime_s_median,runtime_s_max` rows.
std::string timing_csv(const std::vector<BenchRow>& rows);

}  // namespace gridweave
