#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridweave/platform.hpp"
#include "gridweave/workload.hpp"

namespace gridweave {

enum class CalibrationParameter { SpeedPerCore, SchedulingOverhead };
enum class CalibrationObjective { RelMaeWalltime, RelMaeQueue };
enum class CalibrationMode { PerSiteIndependent, Joint };

/// A tuning problem: replay a truth-bearing trace against the base platform
/// while varying one per-site parameter within bounds, minimizing the geomean
/// over sites of the per-site relative mean absolute error.
struct CalibrationProblem {
  std::vector<Job> trace;
  PlatformSpec base_platform;
  CalibrationParameter parameter = CalibrationParameter::SpeedPerCore;
  /// site -> [low, high], in the parameter's units. Every site targeted by the
  /// trace needs an entry.
  std::map<std::string, std::pair<double, double>> bounds;
  CalibrationObjective objective = CalibrationObjective::RelMaeWalltime;
  CalibrationMode mode = CalibrationMode::PerSiteIndependent;
};

struct CalibrationResult {
  std::map<std::string, double> params;  // calibrated value per target site
  double objective_before = 0.0;
  double objective_after = 0.0;
  std::int64_t evaluations_used = 0;  // exact count of simulator invocations
  std::map<std::string, double> per_site_error;         // at the calibrated params
  std::map<std::string, double> per_site_error_before;  // at the initial params
  bool clamped = false;  // a zero per-site error was clamped inside a geomean
  std::vector<std::string> warnings;
};

/// One candidate evaluation: replay simulation at the given per-site values,
/// returning the geomean objective. Counts as one simulator invocation.
double evaluate(const CalibrationProblem& problem, const std::map<std::string, double>& params);

/// Uniform sampling (log-uniform for speeds) within each site's bounds.
/// Candidate 0 is the uncalibrated platform value; a total of n_samples
/// candidate vectors are evaluated, then the per-site argmin values are
/// combined (one extra evaluation when the combination is a new vector).
CalibrationResult random_search(const CalibrationProblem& problem, int n_samples,
                                std::uint64_t seed);

/// Per-site sweep over points_per_site values spanning the bounds, log-spaced
/// for speeds and linearly spaced for overheads, plus the initial value as an
/// extra candidate. Ties prefer the lower parameter value.
CalibrationResult grid_search(const CalibrationProblem& problem, int points_per_site);

/// Joint optimization over all target sites with the evolution-strategy
/// minimizer; speeds are searched in log space. Requires mode = Joint and at
/// least two target sites.
CalibrationResult cma_es_calibrate(const CalibrationProblem& problem, int population,
                                   int generations, std::uint64_t seed);

enum class OptimizerKind { RandomSearch, GridSearch, CmaEs };

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::RandomSearch;
  int n_samples = 100;   // random search
  int points = 16;       // grid search
  int population = 8;    // cma
  int generations = 50;  // cma
  std::uint64_t seed = 0;
};

/// Dispatch to the optimizer named by spec.kind.
CalibrationResult calibrate(const CalibrationProblem& problem, const OptimizerSpec& spec);

/// Second-stage tuning: forces parameter = SchedulingOverhead and
/// objective = RelMaeQueue, validating that queue-time truth is present.
CalibrationResult calibrate_queue_time(CalibrationProblem problem, const OptimizerSpec& spec);

/// The calibrated platform: base with each entry of params applied.
PlatformSpec apply_params(const PlatformSpec& base, CalibrationParameter parameter,
                          const std::map<std::string, double>& params);

/// Distinct target sites of the trace, in name order.
std::vector<std::string> target_sites(const CalibrationProblem& problem);

/// CSV report `site,param_before,param_after,rel_mae_before,rel_mae_after`
/// plus a final `__geomean__` aggregate row.
std::string calibration_report_csv(const CalibrationProblem& problem,
                                   const CalibrationResult& result);

}  // namespace gridweave
