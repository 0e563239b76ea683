#include "gridweave/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridweave/cma_es.hpp"
#include "gridweave/errors.hpp"
#include "gridweave/metrics.hpp"
#include "gridweave/num_io.hpp"
#include "gridweave/rng.hpp"
#include "gridweave/simulation.hpp"
#include "gridweave/telemetry.hpp"

namespace gridweave {

namespace {

// One candidate's replay outcome, decomposed per site.
struct Detail {
  double objective = 0.0;
  std::map<std::string, double> per_site;
  bool clamped = false;
};

void validate_problem(const CalibrationProblem& problem) {
  if (problem.trace.empty())
    throw workload_error("EmptyTrace", "calibration needs a non-empty trace");

  for (const Job& job : problem.trace) {
    const std::string jid = std::to_string(job.id);
    if (job.target_site.empty())
      throw workload_error("MissingTargetSite", "job " + jid + " has no target site");
    const SiteSpec* site = problem.base_platform.find_site(job.target_site);
    if (site == nullptr)
      throw workload_error("UnknownSite",
                           "job " + jid + " targets unknown site '" + job.target_site + "'");
    if (site->total_cores() < job.cores || site->total_memory_mb() < job.memory_mb)
      throw workload_error("InfeasibleJob",
                           "job " + jid + " cannot fit on its target site '" + site->name + "'");
    if (problem.objective == CalibrationObjective::RelMaeWalltime && !job.truth_walltime_s)
      throw workload_error("MissingTruth", "job " + jid + " lacks truth_walltime_s");
    if (problem.objective == CalibrationObjective::RelMaeQueue && !job.truth_queue_time_s)
      throw workload_error("MissingQueueTruth", "job " + jid + " lacks truth_queue_time_s");
  }

  for (const auto& [site, range] : problem.bounds) {
    if (problem.base_platform.find_site(site) == nullptr)
      throw config_error("UnknownSiteInBounds", "bounds name unknown site '" + site + "'");
    const auto [lo, hi] = range;
    const bool positive = problem.parameter == CalibrationParameter::SpeedPerCore;
    if (lo > hi || (positive && lo <= 0.0) || (!positive && lo < 0.0))
      throw config_error("InvalidBounds", "bounds for '" + site + "' are not a valid range");
  }

  std::set<std::string> targets;
  for (const Job& job : problem.trace) targets.insert(job.target_site);
  for (const std::string& site : targets)
    if (!problem.bounds.count(site))
      throw config_error("MissingBounds", "no bounds for target site '" + site + "'");
}

std::map<std::string, double> initial_params(const CalibrationProblem& problem) {
  std::map<std::string, double> params;
  for (const std::string& site : target_sites(problem)) {
    const SiteSpec* spec = problem.base_platform.find_site(site);
    params[site] = problem.parameter == CalibrationParameter::SpeedPerCore
                       ? spec->speed_per_core
                       : spec->scheduling_overhead_s;
  }
  return params;
}

Detail evaluate_detail(const CalibrationProblem& problem,
                       const std::map<std::string, double>& params) {
  const PlatformSpec platform = apply_params(problem.base_platform, problem.parameter, params);
  SimulationOptions options;
  options.policy = "replay";
  const SimulationResult result = run_simulation(platform, problem.trace, options);
  const SummaryMetrics summary = compute_summary(result, problem.trace);

  Detail detail;
  const bool walltime = problem.objective == CalibrationObjective::RelMaeWalltime;
  for (const SiteSummary& row : summary.per_site) {
    const std::optional<double>& err = walltime ? row.rel_mae_walltime : row.rel_mae_queue;
    if (err) detail.per_site[row.site] = *err;
  }
  if (detail.per_site.empty())
    throw runtime_error_of("NoErrorSamples", "no site produced a comparable finished job");
  std::vector<double> values;
  values.reserve(detail.per_site.size());
  for (const auto& [site, err] : detail.per_site) values.push_back(err);
  detail.objective = geomean_clamped(values, &detail.clamped);
  return detail;
}

// argmin over candidates per site, ties broken toward the lower value.
struct SiteBest {
  double value = 0.0;
  double error = 0.0;
  bool defined = false;

  void offer(double v, double e) {
    if (!defined || e < error || (e == error && v < value)) {
      value = v;
      error = e;
      defined = true;
    }
  }
};

// Shared tail of the per-site-independent searches: pick each site's best
// value across the evaluated candidate vectors, then evaluate the combined
// vector (reusing a candidate when the combination already is one).
CalibrationResult combine_per_site(const CalibrationProblem& problem,
                                   const std::vector<std::map<std::string, double>>& candidates,
                                   const std::vector<Detail>& details, std::size_t initial_index,
                                   std::int64_t evaluations) {
  const std::vector<std::string> targets = target_sites(problem);

  CalibrationResult result;
  result.objective_before = details[initial_index].objective;
  result.per_site_error_before = details[initial_index].per_site;
  result.clamped = details[initial_index].clamped;

  std::map<std::string, double> combined;
  for (const std::string& site : targets) {
    SiteBest best;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      auto it = details[k].per_site.find(site);
      if (it != details[k].per_site.end()) best.offer(candidates[k].at(site), it->second);
    }
    if (best.defined) {
      combined[site] = best.value;
    } else {
      combined[site] = candidates[initial_index].at(site);
      result.warnings.push_back("site '" + site + "' produced no comparable jobs; keeping its initial value");
    }
  }

  std::size_t best_vec = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (details[k].objective < details[best_vec].objective) best_vec = k;

  const Detail* chosen = nullptr;
  const std::map<std::string, double>* chosen_params = nullptr;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k] == combined) {
      chosen = &details[k];
      chosen_params = &candidates[k];
      break;
    }
  }
  Detail fresh;
  if (chosen == nullptr) {
    fresh = evaluate_detail(problem, combined);
    ++evaluations;
    if (fresh.objective <= details[best_vec].objective) {
      chosen = &fresh;
      chosen_params = &combined;
    } else {
      // Cross-site coupling (possible for the queue objective) made the
      // per-site combination worse than the best whole vector; keep the
      // latter so improvement over the initial point is guaranteed.
      chosen = &details[best_vec];
      chosen_params = &candidates[best_vec];
      result.warnings.push_back("per-site combination degraded the joint objective; kept the best sampled vector");
    }
  }

  result.params = *chosen_params;
  result.objective_after = chosen->objective;
  result.per_site_error = chosen->per_site;
  result.clamped = result.clamped || chosen->clamped;
  result.evaluations_used = evaluations;
  return result;
}

}  // namespace

PlatformSpec apply_params(const PlatformSpec& base, CalibrationParameter parameter,
                          const std::map<std::string, double>& params) {
  PlatformSpec platform = base;
  for (auto& [site, value] : params) {
    bool found = false;
    for (SiteSpec& spec : platform.sites) {
      if (spec.name != site) continue;
      if (parameter == CalibrationParameter::SpeedPerCore)
        spec.speed_per_core = value;
      else
        spec.scheduling_overhead_s = value;
      found = true;
      break;
    }
    if (!found) throw config_error("UnknownSiteInBounds", "no site named '" + site + "'");
  }
  return platform;
}

std::vector<std::string> target_sites(const CalibrationProblem& problem) {
  std::set<std::string> targets;
  for (const Job& job : problem.trace)
    if (!job.target_site.empty()) targets.insert(job.target_site);
  return {targets.begin(), targets.end()};
}

double evaluate(const CalibrationProblem& problem, const std::map<std::string, double>& params) {
  validate_problem(problem);
  return evaluate_detail(problem, params).objective;
}

CalibrationResult random_search(const CalibrationProblem& problem, int n_samples,
                                std::uint64_t seed) {
  validate_problem(problem);
  if (problem.mode != CalibrationMode::PerSiteIndependent)
    throw config_error("UnsupportedMode", "random_search is per-site independent only");
  if (n_samples < 1) throw config_error("InvalidBudget", "n_samples must be >= 1");

  const std::vector<std::string> targets = target_sites(problem);
  std::vector<std::map<std::string, double>> candidates;
  candidates.reserve(n_samples);
  candidates.push_back(initial_params(problem));

  Rng rng(seed);
  const bool log_space = problem.parameter == CalibrationParameter::SpeedPerCore;
  for (int k = 1; k < n_samples; ++k) {
    std::map<std::string, double> cand;
    for (const std::string& site : targets) {
      const auto [lo, hi] = problem.bounds.at(site);
      cand[site] = log_space ? rng.log_uniform(lo, hi) : rng.uniform(lo, hi);
    }
    candidates.push_back(std::move(cand));
  }

  std::vector<Detail> details;
  details.reserve(candidates.size());
  for (const auto& cand : candidates) details.push_back(evaluate_detail(problem, cand));

  return combine_per_site(problem, candidates, details, 0,
                          static_cast<std::int64_t>(candidates.size()));
}

CalibrationResult grid_search(const CalibrationProblem& problem, int points_per_site) {
  validate_problem(problem);
  if (problem.mode != CalibrationMode::PerSiteIndependent)
    throw config_error("UnsupportedMode", "grid_search is per-site independent only");
  if (points_per_site < 2) throw config_error("InvalidBudget", "points_per_site must be >= 2");

  const std::vector<std::string> targets = target_sites(problem);
  const bool log_space = problem.parameter == CalibrationParameter::SpeedPerCore;

  std::vector<std::map<std::string, double>> candidates;
  candidates.reserve(points_per_site + 1);
  for (int j = 0; j < points_per_site; ++j) {
    const double frac = static_cast<double>(j) / static_cast<double>(points_per_site - 1);
    std::map<std::string, double> cand;
    for (const std::string& site : targets) {
      const auto [lo, hi] = problem.bounds.at(site);
      cand[site] = log_space ? lo * std::pow(hi / lo, frac) : lo + (hi - lo) * frac;
    }
    candidates.push_back(std::move(cand));
  }
  candidates.push_back(initial_params(problem));
  const std::size_t initial_index = candidates.size() - 1;

  std::vector<Detail> details;
  details.reserve(candidates.size());
  for (const auto& cand : candidates) details.push_back(evaluate_detail(problem, cand));

  return combine_per_site(problem, candidates, details, initial_index,
                          static_cast<std::int64_t>(candidates.size()));
}

CalibrationResult cma_es_calibrate(const CalibrationProblem& problem, int population,
                                   int generations, std::uint64_t seed) {
  validate_problem(problem);
  if (problem.mode != CalibrationMode::Joint)
    throw config_error("UnsupportedMode", "cma_es calibrates in Joint mode");
  const std::vector<std::string> targets = target_sites(problem);
  const int dim = static_cast<int>(targets.size());
  if (dim < 2) throw config_error("DimensionTooSmall", "joint calibration needs >= 2 sites");
  if (population < 4) throw config_error("InvalidBudget", "population must be >= 4");
  if (generations < 1) throw config_error("InvalidBudget", "generations must be >= 1");

  const bool log_space = problem.parameter == CalibrationParameter::SpeedPerCore;
  auto to_search = [log_space](double v) { return log_space ? std::log(v) : v; };
  auto from_search = [log_space](double z) { return log_space ? std::exp(z) : z; };

  std::vector<double> lower(dim), upper(dim), x0(dim);
  const std::map<std::string, double> initial = initial_params(problem);
  CalibrationResult result;
  double width_sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    const auto [lo, hi] = problem.bounds.at(targets[i]);
    lower[i] = to_search(lo);
    upper[i] = to_search(hi);
    width_sum += upper[i] - lower[i];
    x0[i] = to_search(initial.at(targets[i]));
    if (x0[i] < lower[i] || x0[i] > upper[i]) {
      x0[i] = std::clamp(x0[i], lower[i], upper[i]);
      result.warnings.push_back("initial value for '" + targets[i] +
                                "' clamped into its bounds");
    }
  }

  std::int64_t evaluations = 0;
  Detail first_detail;
  Detail best_detail;
  double best_f = 0.0;
  auto objective = [&](const std::vector<double>& z) {
    std::map<std::string, double> params;
    for (int i = 0; i < dim; ++i) params[targets[i]] = from_search(z[i]);
    Detail d = evaluate_detail(problem, params);
    if (evaluations == 0) {
      first_detail = d;
      best_detail = d;
      best_f = d.objective;
    } else if (d.objective < best_f) {
      best_detail = d;
      best_f = d.objective;
    }
    ++evaluations;
    return d.objective;
  };

  CmaOptions options;
  options.population = population;
  options.max_generations = generations;
  options.seed = seed;
  options.sigma0 = std::max(0.3 * width_sum / dim, 1e-12);
  options.lower = lower;
  options.upper = upper;
  const CmaResult cma = cma_es_minimize(objective, x0, options);

  for (int i = 0; i < dim; ++i) result.params[targets[i]] = from_search(cma.best_x[i]);
  result.objective_before = first_detail.objective;
  result.per_site_error_before = first_detail.per_site;
  result.objective_after = cma.best_f;
  result.per_site_error = best_detail.per_site;
  result.clamped = first_detail.clamped || best_detail.clamped;
  result.evaluations_used = evaluations;
  return result;
}

CalibrationResult calibrate(const CalibrationProblem& problem, const OptimizerSpec& spec) {
  switch (spec.kind) {
    case OptimizerKind::RandomSearch:
      return random_search(problem, spec.n_samples, spec.seed);
    case OptimizerKind::GridSearch:
      return grid_search(problem, spec.points);
    case OptimizerKind::CmaEs:
      return cma_es_calibrate(problem, spec.population, spec.generations, spec.seed);
  }
  throw config_error("UnsupportedMode", "unknown optimizer kind");
}

CalibrationResult calibrate_queue_time(CalibrationProblem problem, const OptimizerSpec& spec) {
  problem.parameter = CalibrationParameter::SchedulingOverhead;
  problem.objective = CalibrationObjective::RelMaeQueue;
  return calibrate(problem, spec);
}

std::string calibration_report_csv(const CalibrationProblem& problem,
                                   const CalibrationResult& result) {
  const std::map<std::string, double> initial = initial_params(problem);
  std::string csv = "site,param_before,param_after,rel_mae_before,rel_mae_after\n";
  auto cell = [](const std::map<std::string, double>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? std::string() : format_double(it->second);
  };
  for (const auto& [site, before] : initial) {
    csv += site;
    csv += ',';
    csv += format_double(before);
    csv += ',';
    csv += cell(result.params, site);
    csv += ',';
    csv += cell(result.per_site_error_before, site);
    csv += ',';
    csv += cell(result.per_site_error, site);
    csv += '\n';
  }
  csv += "__geomean__,,,";
  csv += format_double(result.objective_before);
  csv += ',';
  csv += format_double(result.objective_after);
  csv += '\n';
  return csv;
}

}  // namespace gridweave
