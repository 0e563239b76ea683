#include "gridweave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "gridweave/errors.hpp"
#include "gridweave/num_io.hpp"
#include "gridweave/telemetry.hpp"

namespace gridweave {

namespace {

struct ErrorAccum {
  double sum = 0.0;
  std::int64_t count = 0;

  void add(double sim, double truth) {
    sum += std::abs(sim - truth) / truth;
    ++count;
  }
  std::optional<double> mean() const {
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  }
};

}  // namespace

SummaryMetrics compute_summary(const SimulationResult& result, const std::vector<Job>& trace) {
  std::unordered_map<std::uint64_t, const Job*> by_id;
  by_id.reserve(trace.size());
  for (const Job& job : trace) by_id[job.id] = &job;

  std::unordered_map<std::string, ErrorAccum> wall_err;
  std::unordered_map<std::string, ErrorAccum> queue_err;
  std::unordered_map<std::string, std::int64_t> finished_at;
  SummaryMetrics out;
  out.makespan_s = result.final_time_s;

  for (const JobOutcome& oc : result.jobs) {
    if (oc.state != JobState::Finished) continue;
    ++finished_at[oc.site];
    auto it = by_id.find(oc.id);
    if (it == by_id.end()) continue;
    const Job& job = *it->second;

    if (job.truth_walltime_s && oc.sim_walltime_s) {
      if (*job.truth_walltime_s > 0.0)
        wall_err[oc.site].add(*oc.sim_walltime_s, *job.truth_walltime_s);
      else
        ++out.excluded_zero_truth_walltime;
    }
    if (job.truth_queue_time_s && oc.sim_queue_time_s) {
      if (*job.truth_queue_time_s > 0.0)
        queue_err[oc.site].add(*oc.sim_queue_time_s, *job.truth_queue_time_s);
      else
        ++out.excluded_zero_truth_queue;
    }
  }

  std::vector<double> site_wall;
  std::vector<double> site_queue;
  for (const SiteStats& st : result.sites) {
    SiteSummary row;
    row.site = st.name;
    auto fit = finished_at.find(st.name);
    row.n_jobs = fit == finished_at.end() ? 0 : fit->second;
    if (auto it = wall_err.find(st.name); it != wall_err.end()) {
      row.rel_mae_walltime = it->second.mean();
      if (row.rel_mae_walltime) site_wall.push_back(*row.rel_mae_walltime);
    }
    if (auto it = queue_err.find(st.name); it != queue_err.end()) {
      row.rel_mae_queue = it->second.mean();
      if (row.rel_mae_queue) site_queue.push_back(*row.rel_mae_queue);
    }
    if (result.final_time_s > 0.0 && st.total_cores > 0) {
      row.mean_utilization =
          st.busy_core_seconds / (static_cast<double>(st.total_cores) * result.final_time_s);
      row.throughput_jobs_per_s = static_cast<double>(row.n_jobs) / result.final_time_s;
    }
    out.per_site.push_back(std::move(row));
  }

  if (!site_wall.empty()) {
    bool clamped = false;
    out.geomean_rel_mae = geomean_clamped(site_wall, &clamped);
    out.geomean_clamped = out.geomean_clamped || clamped;
  }
  if (!site_queue.empty()) {
    bool clamped = false;
    out.geomean_rel_mae_queue = geomean_clamped(site_queue, &clamped);
    out.geomean_clamped = out.geomean_clamped || clamped;
  }

  if (out.excluded_zero_truth_walltime > 0)
    out.warnings.push_back(std::to_string(out.excluded_zero_truth_walltime) +
                           " jobs with non-positive truth walltime excluded from rel-MAE");
  if (out.excluded_zero_truth_queue > 0)
    out.warnings.push_back(std::to_string(out.excluded_zero_truth_queue) +
                           " jobs with non-positive truth queue time excluded from rel-MAE");
  return out;
}

std::string summary_to_csv(const SummaryMetrics& summary) {
  std::string csv =
      "site,n_jobs,rel_mae_walltime,rel_mae_queue,mean_utilization,throughput_jobs_per_s\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  std::int64_t total_jobs = 0;
  for (const SiteSummary& row : summary.per_site) {
    total_jobs += row.n_jobs;
    csv += row.site;
    csv += ',';
    csv += std::to_string(row.n_jobs);
    csv += ',';
    csv += cell(row.rel_mae_walltime);
    csv += ',';
    csv += cell(row.rel_mae_queue);
    csv += ',';
    csv += format_double(row.mean_utilization);
    csv += ',';
    csv += format_double(row.throughput_jobs_per_s);
    csv += '\n';
  }
  csv += "__geomean__,";
  csv += std::to_string(total_jobs);
  csv += ',';
  csv += cell(summary.geomean_rel_mae);
  csv += ',';
  csv += cell(summary.geomean_rel_mae_queue);
  csv += ",,\n";
  return csv;
}

std::map<std::string, double> per_class_rel_mae(const SimulationResult& result,
                                                const std::vector<Job>& trace) {
  std::unordered_map<std::uint64_t, const Job*> by_id;
  by_id.reserve(trace.size());
  for (const Job& job : trace) by_id[job.id] = &job;

  std::map<std::string, ErrorAccum> acc;
  for (const JobOutcome& oc : result.jobs) {
    if (oc.state != JobState::Finished || !oc.sim_walltime_s) continue;
    auto it = by_id.find(oc.id);
    if (it == by_id.end()) continue;
    const Job& job = *it->second;
    if (!job.truth_walltime_s || *job.truth_walltime_s <= 0.0) continue;
    acc[job.cores == 1 ? "single_core" : "multi_core"].add(*oc.sim_walltime_s,
                                                           *job.truth_walltime_s);
  }
  std::map<std::string, double> out;
  for (const auto& [name, a] : acc)
    if (auto m = a.mean()) out[name] = *m;
  return out;
}

}  // namespace gridweave
