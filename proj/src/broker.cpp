#include "gridweave/broker.hpp"

#include <algorithm>
#include <cmath>

#include "gridweave/errors.hpp"

namespace gridweave {

Broker::Broker(Engine& engine, const PlatformSpec& platform, const std::vector<Job>& jobs,
               AllocationPolicy& policy, TelemetryLog& log, const SimulationOptions& options)
    : engine_(engine),
      platform_(platform),
      policy_(policy),
      log_(log),
      options_(options),
      jobs_(jobs) {
  runtime_.resize(jobs_.size());
  states_.assign(jobs_.size(), JobState::Pending);
  err_sum_.assign(engine_.site_count(), 0.0);
  err_count_.assign(engine_.site_count(), 0);
  engine_.set_resource_freed_hook([this](std::int32_t site) { resource_freed(site); });
}

void Broker::prepare() {
  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    const Job& job = jobs_[i];
    if (index_of_.count(job.id))
      throw workload_error("DuplicateJobId", "duplicate job id " + std::to_string(job.id));
    index_of_[job.id] = i;
    if (job.cores < 1 || job.work < 0 || job.memory_mb < 0 || job.input_bytes < 0 ||
        job.output_bytes < 0 || job.submit_time_s < 0)
      throw workload_error("InvalidJob", "job " + std::to_string(job.id) +
                                             " violates field invariants");
  }
  for (const Job& job : jobs_) engine_.schedule_job_arrival(job.submit_time_s, job.id);
  if (options_.snapshot_mode == SnapshotMode::Periodic && !jobs_.empty())
    engine_.schedule_snapshot_tick(options_.snapshot_interval_s);
}

ResourceView Broker::make_view() const {
  ResourceView view;
  view.pending_global = static_cast<std::int64_t>(pending_.size());
  view.sites.reserve(engine_.site_count());
  for (int i = 0; i < engine_.site_count(); ++i) {
    const SiteState& s = engine_.site(i);
    SiteView sv;
    sv.name = s.spec.name;
    sv.total_cores = s.total_cores;
    sv.free_cores = s.free_cores;
    sv.free_memory_mb = s.free_memory_mb;
    sv.speed_per_core = s.spec.speed_per_core;
    sv.uplink_bandwidth_bps = s.spec.uplink_bandwidth_bps;
    sv.local_queue_length = static_cast<std::int64_t>(s.local_queue.size());
    view.sites.push_back(std::move(sv));
  }
  return view;
}

void Broker::record(std::size_t idx, JobState state, std::int32_t site) {
  states_[idx] = state;
  if (site < 0) {
    log_.record_transition(jobs_[idx].id, state, engine_.now(), "", 0,
                           static_cast<std::int64_t>(pending_.size()), 0, 0);
  } else {
    const SiteState& s = engine_.site(site);
    log_.record_transition(jobs_[idx].id, state, engine_.now(), s.spec.name, s.free_cores,
                           static_cast<std::int64_t>(pending_.size()), s.assigned_count,
                           s.finished_count);
  }
}

bool Broker::site_can_ever_run(const SiteState& site, const Job& job) const {
  return site.total_cores >= job.cores && site.total_memory_mb >= job.memory_mb;
}

void Broker::drop_from_pending(std::size_t idx) {
  auto pos = std::find(pending_.begin(), pending_.end(), jobs_[idx].id);
  if (pos != pending_.end()) pending_.erase(pos);
}

void Broker::fail_job(std::size_t idx) {
  drop_from_pending(idx);
  runtime_[idx].terminal_s = engine_.now();
  ++failed_total_;
  record(idx, JobState::Failed, -1);
}

void Broker::on_job_arrival(std::uint64_t job_id) {
  const std::size_t idx = index_of_.at(job_id);
  runtime_[idx].submitted_s = engine_.now();
  // On the list before recording: the transition's counters describe the state
  // just after it, and a job that just became Pending is itself pending.
  pending_.push_back(job_id);
  record(idx, JobState::Pending, -1);

  // Unsatisfiable anywhere: fail fast instead of pending forever.
  bool feasible_somewhere = false;
  for (int i = 0; i < engine_.site_count(); ++i) {
    if (site_can_ever_run(engine_.site(i), jobs_[idx])) {
      feasible_somewhere = true;
      break;
    }
  }
  if (!feasible_somewhere) {
    fail_job(idx);
    return;
  }

  ResourceView view = make_view();
  policy_.get_resource_information(view);
  offer_to_policy(idx, view);
}

bool Broker::offer_to_policy(std::size_t idx, const ResourceView& view) {
  std::optional<std::string> choice = policy_.assign_job(jobs_[idx], view);
  if (!choice) return false;
  const int site = engine_.site_index(*choice);
  if (site < 0)
    throw runtime_error_of("PolicyReturnedUnknownSite",
                           "policy chose nonexistent site '" + *choice + "'");
  if (!site_can_ever_run(engine_.site(site), jobs_[idx])) {
    // The chosen site can never satisfy the job's shape (e.g. replay against a
    // shrunk platform): fail fast rather than queue a permanent blocker.
    fail_job(idx);
    return true;
  }
  assign_to_site(idx, site);
  return true;
}

void Broker::assign_to_site(std::size_t idx, std::int32_t site) {
  drop_from_pending(idx);
  JobRuntime& rt = runtime_[idx];
  rt.site = site;
  rt.assigned_s = engine_.now();
  SiteState& s = engine_.site(site);
  ++s.assigned_count;
  record(idx, JobState::Assigned, site);
  s.local_queue.push_back(jobs_[idx].id);
  pump(site);
}

void Broker::pump(std::int32_t site) {
  SiteState& s = engine_.site(site);
  if (s.local_queue.empty()) return;
  const std::size_t head = index_of_.at(s.local_queue.front());
  JobRuntime& rt = runtime_[head];
  if (rt.phase != Phase::None) return;  // head already in the pipeline
  rt.phase = Phase::StageIn;
  rt.stage_in_start_s = engine_.now();
  const std::uint64_t flow = engine_.open_flow(site, jobs_[head].input_bytes);
  flow_waiters_[flow] = head;
}

void Broker::on_transfer_complete(std::uint64_t flow_id) {
  auto it = flow_waiters_.find(flow_id);
  if (it == flow_waiters_.end())
    throw runtime_error_of("OrphanFlow", "transfer completion with no waiting job");
  const std::size_t idx = it->second;
  flow_waiters_.erase(it);
  JobRuntime& rt = runtime_[idx];

  if (rt.phase == Phase::StageIn) {
    rt.stage_in_s = engine_.now() - rt.stage_in_start_s;
    rt.phase = Phase::Overhead;
    rt.overhead_start_s = engine_.now();
    engine_.schedule_overhead_elapsed(
        engine_.now() + engine_.site(rt.site).spec.scheduling_overhead_s, jobs_[idx].id,
        rt.site);
  } else if (rt.phase == Phase::StageOut) {
    rt.stage_out_s = engine_.now() - rt.stage_out_start_s;
    rt.phase = Phase::Done;
    rt.terminal_s = engine_.now();
    SiteState& s = engine_.site(rt.site);
    ++s.finished_count;
    ++finished_total_;
    record(idx, JobState::Finished, rt.site);
    const Job& job = jobs_[idx];
    if (job.truth_walltime_s && *job.truth_walltime_s > 0.0) {
      err_sum_[rt.site] +=
          std::abs(*rt.sim_walltime_s - *job.truth_walltime_s) / *job.truth_walltime_s;
      ++err_count_[rt.site];
    }
    policy_.on_job_finished(job, s.spec.name);
  } else {
    throw runtime_error_of("PhaseMismatch", "flow completed in unexpected phase");
  }
}

void Broker::on_overhead_elapsed(std::uint64_t job_id, std::int32_t site) {
  const std::size_t idx = index_of_.at(job_id);
  JobRuntime& rt = runtime_[idx];
  if (rt.phase != Phase::Overhead || rt.site != site)
    throw runtime_error_of("PhaseMismatch", "overhead elapsed in unexpected phase");
  rt.overhead_s = engine_.now() - rt.overhead_start_s;
  rt.phase = Phase::WaitReserve;
  try_start_compute(idx);
}

void Broker::try_start_compute(std::size_t idx) {
  JobRuntime& rt = runtime_[idx];
  const Job& job = jobs_[idx];
  if (!engine_.reserve(rt.site, job.cores, job.memory_mb)) return;  // stays WaitReserve

  SiteState& s = engine_.site(rt.site);
  if (s.local_queue.empty() || s.local_queue.front() != job.id)
    throw runtime_error_of("QueueCorruption", "reserving job is not the queue head");
  s.local_queue.pop_front();

  rt.phase = Phase::Compute;
  rt.running_s = engine_.now();
  const double duration = compute_duration(job, s.spec);
  rt.sim_walltime_s = duration;
  record(idx, JobState::Running, rt.site);
  engine_.schedule_compute_complete(engine_.now() + duration, job.id, rt.site);
  pump(rt.site);
}

void Broker::on_compute_complete(std::uint64_t job_id, std::int32_t site) {
  const std::size_t idx = index_of_.at(job_id);
  JobRuntime& rt = runtime_[idx];
  if (rt.phase != Phase::Compute || rt.site != site)
    throw runtime_error_of("PhaseMismatch", "compute completed in unexpected phase");

  // Release first (the resource-freed hook runs the head retry and the pending
  // rescan synchronously), then stage output.
  engine_.release(site, jobs_[idx].cores, jobs_[idx].memory_mb);
  rt.phase = Phase::StageOut;
  rt.stage_out_start_s = engine_.now();
  const std::uint64_t flow = engine_.open_flow(site, jobs_[idx].output_bytes);
  flow_waiters_[flow] = idx;
}

void Broker::resource_freed(std::int32_t site) {
  // Head retry for this site's receiver, then the broker-wide pending rescan.
  SiteState& s = engine_.site(site);
  if (!s.local_queue.empty()) {
    const std::size_t head = index_of_.at(s.local_queue.front());
    if (runtime_[head].phase == Phase::WaitReserve) try_start_compute(head);
  }
  rescan_pending();
}

void Broker::rescan_pending() {
  if (pending_.empty()) return;
  const std::vector<std::uint64_t> snapshot(pending_.begin(), pending_.end());
  ResourceView batch_view = make_view();
  policy_.get_resource_information(batch_view);
  for (std::uint64_t job_id : snapshot) {
    const std::size_t idx = index_of_.at(job_id);
    if (states_[idx] != JobState::Pending) continue;
    ResourceView view = make_view();
    // A successful offer removes the job from the pending list itself.
    offer_to_policy(idx, view);
  }
}

void Broker::on_snapshot_tick() {
  for (int i = 0; i < engine_.site_count(); ++i) {
    const SiteState& s = engine_.site(i);
    SnapshotRow row;
    row.sim_time_s = engine_.now();
    row.site = s.spec.name;
    row.available_cores = s.free_cores;
    row.pending_jobs = static_cast<std::int64_t>(pending_.size());
    row.assigned_jobs = s.assigned_count;
    row.finished_jobs = s.finished_count;
    snapshots_.push_back(std::move(row));
  }
  if (engine_.pending_non_tick_events() > 0)
    engine_.schedule_snapshot_tick(engine_.now() + options_.snapshot_interval_s);
}

void Broker::check_all_terminal() const {
  std::size_t stuck = 0;
  for (JobState s : states_)
    if (s != JobState::Finished && s != JobState::Failed) ++stuck;
  if (stuck > 0)
    throw runtime_error_of("Deadlock",
                           std::to_string(stuck) + " jobs non-terminal with an empty queue");
}

void Broker::finalize(SimulationResult& out) const {
  out.total_jobs = jobs_.size();
  out.finished_jobs = finished_total_;
  out.failed_jobs = failed_total_;

  out.jobs.reserve(jobs_.size());
  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    const JobRuntime& rt = runtime_[i];
    JobOutcome o;
    o.id = jobs_[i].id;
    o.state = states_[i];
    if (rt.site >= 0) o.site = engine_.site(rt.site).spec.name;
    o.submitted_s = rt.submitted_s;
    o.assigned_s = rt.assigned_s;
    o.running_s = rt.running_s;
    o.terminal_s = rt.terminal_s;
    o.sim_walltime_s = rt.sim_walltime_s;
    if (rt.running_s && rt.submitted_s) o.sim_queue_time_s = *rt.running_s - *rt.submitted_s;
    o.stage_in_s = rt.stage_in_s;
    o.overhead_s = rt.overhead_s;
    o.stage_out_s = rt.stage_out_s;
    out.jobs.push_back(std::move(o));
  }

  out.sites.reserve(engine_.site_count());
  std::vector<double> site_errors;
  for (int i = 0; i < engine_.site_count(); ++i) {
    const SiteState& s = engine_.site(i);
    SiteStats stats;
    stats.name = s.spec.name;
    stats.total_cores = s.total_cores;
    stats.total_memory_mb = s.total_memory_mb;
    stats.assigned_jobs = s.assigned_count;
    stats.finished_jobs = s.finished_count;
    stats.failed_jobs = s.failed_count;
    stats.busy_core_seconds = s.busy_core_seconds;
    out.sites.push_back(std::move(stats));
    if (err_count_[i] > 0) site_errors.push_back(err_sum_[i] / static_cast<double>(err_count_[i]));
  }
  if (!site_errors.empty()) out.online_geomean_rel_mae = geomean_clamped(site_errors);

  out.snapshots = snapshots_;
}

}  // namespace gridweave
