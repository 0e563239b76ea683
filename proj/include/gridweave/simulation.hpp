#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridweave/kernel.hpp"
#include "gridweave/platform.hpp"
#include "gridweave/policy.hpp"
#include "gridweave/telemetry.hpp"
#include "gridweave/workload.hpp"

namespace gridweave {

struct SimulationOptions {
  std::string policy = "first_fit";
  std::uint64_t seed = 0;
  SnapshotMode snapshot_mode = SnapshotMode::OnTransition;
  double snapshot_interval_s = 0.0;
  std::optional<double> stop_time_s;

  /// When set, used instead of constructing `policy` from the registry.
  AllocationPolicy* policy_override = nullptr;
};

/// Per-site counter sample emitted by periodic snapshot mode.
struct SnapshotRow {
  double sim_time_s = 0.0;
  std::string site;
  std::int64_t available_cores = 0;
  std::int64_t pending_jobs = 0;
  std::int64_t assigned_jobs = 0;
  std::int64_t finished_jobs = 0;
};

struct JobOutcome {
  std::uint64_t id = 0;
  JobState state = JobState::Pending;
  std::string site;  // empty when never assigned
  std::optional<double> submitted_s, assigned_s, running_s, terminal_s;
  /// Compute-phase duration; staging and overhead are charged to queue time.
  std::optional<double> sim_walltime_s;
  /// running_s - submitted_s.
  std::optional<double> sim_queue_time_s;
  // Phase durations, recorded so the walltime/queue attribution can be
  // recomputed differently downstream.
  double stage_in_s = 0.0;
  double overhead_s = 0.0;
  double stage_out_s = 0.0;
};

struct SiteStats {
  std::string name;
  std::int64_t total_cores = 0;
  double total_memory_mb = 0.0;
  std::int64_t assigned_jobs = 0;
  std::int64_t finished_jobs = 0;
  std::int64_t failed_jobs = 0;
  double busy_core_seconds = 0.0;
};

struct SimulationResult {
  double final_time_s = 0.0;
  bool truncated = false;
  std::uint64_t total_jobs = 0;
  std::uint64_t finished_jobs = 0;
  std::uint64_t failed_jobs = 0;
  std::vector<JobOutcome> jobs;  // input order
  std::vector<SiteStats> sites;  // lexicographic name order
  std::vector<EventRecord> events;
  std::vector<SnapshotRow> snapshots;
  /// Walltime-error aggregate accumulated incrementally as jobs finished;
  /// equals the value recomputed from the final outcomes.
  std::optional<double> online_geomean_rel_mae;
  std::vector<std::string> warnings;
};

/// Invariant-checking hook: runs after every dispatched event.
struct ProbeView {
  const Engine* engine = nullptr;
  const std::vector<JobState>* job_states = nullptr;  // aligned with input job order
  std::size_t pending_list_size = 0;
};
using EventProbe = std::function<void(const ProbeView&)>;

/// One full run: schedules arrivals, drives the broker and receiver pipelines
/// to completion (or stop_time_s), and returns outcomes plus the transition
/// log. Deterministic for identical inputs.
SimulationResult run_simulation(const PlatformSpec& platform, const std::vector<Job>& jobs,
                                const SimulationOptions& options = {},
                                const PolicyRegistry& registry = default_policy_registry(),
                                const EventProbe& probe = {});

}  // namespace gridweave
