#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridweave/simulation.hpp"
#include "gridweave/workload.hpp"

namespace gridweave {

/// Per-site accuracy and throughput figures for one completed run.
struct SiteSummary {
  std::string site;
  std::int64_t n_jobs = 0;  // finished jobs at this site
  std::optional<double> rel_mae_walltime;
  std::optional<double> rel_mae_queue;
  double mean_utilization = 0.0;        // busy-core-seconds / (cores * makespan)
  double throughput_jobs_per_s = 0.0;   // finished / makespan
};

struct SummaryMetrics {
  std::vector<SiteSummary> per_site;  // site-name order
  std::optional<double> geomean_rel_mae;        // over sites with defined walltime error
  std::optional<double> geomean_rel_mae_queue;  // over sites with defined queue error
  double makespan_s = 0.0;
  std::size_t excluded_zero_truth_walltime = 0;
  std::size_t excluded_zero_truth_queue = 0;
  bool geomean_clamped = false;  // some site error was exactly 0 and got clamped
  std::vector<std::string> warnings;
};

/// Compare a finished run against the truth columns of the trace it consumed.
/// Jobs whose truth value is absent or <= 0 are skipped (counted in the
/// excluded_* fields, with a warning when nonzero).
SummaryMetrics compute_summary(const SimulationResult& result, const std::vector<Job>& trace);

/// Serialize with the fixed header
/// `site,n_jobs,rel_mae_walltime,rel_mae_queue,mean_utilization,throughput_jobs_per_s`
/// followed by one row per site and a final aggregate row keyed `__geomean__`.
/// Undefined cells are left empty.
std::string summary_to_csv(const SummaryMetrics& summary);

/// Experimental: walltime rel-MAE split by job shape instead of by site.
/// Jobs with cores == 1 land in "single_core", the rest in "multi_core".
std::map<std::string, double> per_class_rel_mae(const SimulationResult& result,
                                                const std::vector<Job>& trace);

}  // namespace gridweave
