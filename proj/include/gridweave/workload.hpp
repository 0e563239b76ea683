#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridweave/platform.hpp"

namespace gridweave {

enum class JobState { Pending, Assigned, Running, Finished, Failed };

std::string to_string(JobState state);  // lowercase, e.g. "running"
std::optional<JobState> job_state_from_string(const std::string& text);

struct Job {
  std::uint64_t id = 0;
  double submit_time_s = 0.0;
  double work = 0.0;  // compute-units; walltime = work / (cores * speed_per_core)
  std::int64_t cores = 1;
  double memory_mb = 0.0;
  double input_bytes = 0.0;
  double output_bytes = 0.0;
  std::string target_site;  // empty when the policy decides
  std::optional<double> truth_walltime_s;
  std::optional<double> truth_queue_time_s;
};

struct WorkloadGenSpec {
  std::int64_t n_sites = 1;
  std::int64_t jobs_per_site = 1;
  std::uint64_t seed = 0;
  double work_min = 1.0, work_max = 1.0;
  std::vector<std::int64_t> cores_choices = {1};
  double interarrival_mean_s = 1.0;
  double io_min_bytes = 0.0, io_max_bytes = 0.0;  // shared by input and output draws
};

/// Read a trace CSV (header per write_trace). Jobs come back sorted by
/// (submit_time_s, id). Throws MalformedRow(line), DuplicateJobId, MissingFile.
std::vector<Job> parse_trace(const std::string& path);
std::vector<Job> parse_trace_text(const std::string& text);

/// Exact inverse of parse_trace: doubles are written in shortest round-trip
/// form, optional columns stay empty.
void write_trace(const std::string& path, const std::vector<Job>& jobs);
std::string trace_to_text(const std::vector<Job>& jobs);

/// Seeded synthetic workload: n_sites*jobs_per_site jobs, exponential
/// interarrivals, work and io uniform in their ranges, cores drawn uniformly
/// from cores_choices. target_site is left unset. Pure in (spec, seed).
std::vector<Job> generate_workload(const WorkloadGenSpec& spec);

/// Stamp ground truth onto a workload: target_site from the assignment map,
/// truth_walltime_s from the analytic compute time, truth_queue_time_s from
/// one reference simulation at the platform's own parameters.
std::vector<Job> synthesize_truth(const std::vector<Job>& jobs, const PlatformSpec& platform,
                                  const std::map<std::uint64_t, std::string>& assignment);

}  // namespace gridweave
