#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridweave/kernel.hpp"
#include "gridweave/policy.hpp"
#include "gridweave/simulation.hpp"
#include "gridweave/telemetry.hpp"

namespace gridweave {

/// Main-server loop plus the per-site receiver pipelines, multiplexed on the
/// kernel's event queue.
///
/// Receiver semantics per site (strict FIFO): only the head of the local queue
/// progresses through stage-in -> scheduling overhead -> reservation. A head
/// that cannot reserve blocks the queue until a release at this site. Once a
/// job reserves it starts computing and leaves the queue, letting the next
/// job begin staging. Cores are held for the compute phase only; output
/// staging happens after release.
class Broker final : public EventHandler {
public:
  Broker(Engine& engine, const PlatformSpec& platform, const std::vector<Job>& jobs,
         AllocationPolicy& policy, TelemetryLog& log, const SimulationOptions& options);

  /// Validate jobs and schedule every arrival (plus the first snapshot tick in
  /// periodic mode).
  void prepare();

  void on_job_arrival(std::uint64_t job_id) override;
  void on_transfer_complete(std::uint64_t flow_id) override;
  void on_compute_complete(std::uint64_t job_id, std::int32_t site) override;
  void on_overhead_elapsed(std::uint64_t job_id, std::int32_t site) override;
  void on_snapshot_tick() override;

  /// Fill outcome fields of the result (jobs, sites, snapshots, counters,
  /// online metric). Events are taken from the TelemetryLog by the caller.
  void finalize(SimulationResult& out) const;

  std::size_t pending_list_size() const { return pending_.size(); }
  const std::vector<JobState>& job_states() const { return states_; }
  /// Throws Deadlock if any job is non-terminal (call only on untruncated runs).
  void check_all_terminal() const;

private:
  enum class Phase : std::uint8_t {
    None,        // in local queue, pipeline not started
    StageIn,
    Overhead,
    WaitReserve,  // head blocked on reservation
    Compute,
    StageOut,
    Done,
  };

  struct JobRuntime {
    Phase phase = Phase::None;
    std::int32_t site = -1;
    std::optional<double> submitted_s, assigned_s, running_s, terminal_s;
    std::optional<double> sim_walltime_s;  // stored as the scheduled compute duration
    double stage_in_start_s = 0.0, overhead_start_s = 0.0, stage_out_start_s = 0.0;
    double stage_in_s = 0.0, overhead_s = 0.0, stage_out_s = 0.0;
  };

  ResourceView make_view() const;
  void record(std::size_t idx, JobState state, std::int32_t site);
  /// Feasibility/decision path shared by arrival and pending rescan. Returns
  /// true when the job left the Pending state (assigned or failed).
  bool offer_to_policy(std::size_t idx, const ResourceView& view);
  void assign_to_site(std::size_t idx, std::int32_t site);
  void drop_from_pending(std::size_t idx);
  void fail_job(std::size_t idx);
  /// Start the pipeline for the site's queue head if it is not yet started.
  void pump(std::int32_t site);
  void try_start_compute(std::size_t idx);
  void resource_freed(std::int32_t site);
  void rescan_pending();
  bool site_can_ever_run(const SiteState& site, const Job& job) const;

  Engine& engine_;
  const PlatformSpec& platform_;
  AllocationPolicy& policy_;
  TelemetryLog& log_;
  const SimulationOptions& options_;

  std::vector<Job> jobs_;  // input order
  std::vector<JobRuntime> runtime_;
  std::vector<JobState> states_;
  std::unordered_map<std::uint64_t, std::size_t> index_of_;
  std::deque<std::uint64_t> pending_;  // job ids, FIFO by first decline
  std::unordered_map<std::uint64_t, std::size_t> flow_waiters_;  // flow -> job index

  std::vector<SnapshotRow> snapshots_;
  std::uint64_t finished_total_ = 0;
  std::uint64_t failed_total_ = 0;

  // Online walltime-error accumulation, one slot per site (engine order).
  std::vector<double> err_sum_;
  std::vector<std::uint64_t> err_count_;
};

}  // namespace gridweave
