#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridweave/platform.hpp"
#include "gridweave/workload.hpp"

namespace gridweave {

enum class EventType : std::uint8_t {
  JobArrival,
  TransferComplete,
  ComputeComplete,
  OverheadElapsed,
  SnapshotTick,
};

struct SimEvent {
  double time_s = 0.0;
  std::uint64_t seq = 0;  // assigned by schedule(); global tie-breaker
  EventType kind = EventType::SnapshotTick;
  std::uint64_t job_id = 0;
  std::uint64_t flow_id = 0;
  std::uint64_t flow_generation = 0;  // stale-completion guard, see open_flow
  std::int32_t site = -1;
};

/// One data transfer occupying a site uplink. Progress is integrated lazily:
/// transferred_bytes is only brought up to date when the link's active set
/// changes, at which point every flow on the link gets a fresh equal share and
/// a rescheduled completion event. Superseded completion events are not
/// removed from the queue; they are recognized by a stale generation counter
/// and dropped on pop.
struct Flow {
  std::uint64_t id = 0;
  std::int32_t link = -1;  // site index
  double total_bytes = 0.0;
  double transferred_bytes = 0.0;
  double rate_bps = 0.0;
  double started_at_s = 0.0;
  double latency_s = 0.0;       // one-time tail delay, applied after the bytes drain
  double progress_mark_s = 0.0;  // clock value transferred_bytes is valid at
  std::uint64_t generation = 0;
  bool drained = false;
};

struct SiteState {
  SiteSpec spec;
  std::int64_t total_cores = 0;
  double total_memory_mb = 0.0;
  std::int64_t free_cores = 0;
  double free_memory_mb = 0.0;
  std::deque<std::uint64_t> local_queue;  // job ids, FIFO
  std::int64_t assigned_count = 0;
  std::int64_t finished_count = 0;
  std::int64_t failed_count = 0;
  // Integrated compute occupancy: sum over time of (total - free) cores.
  double busy_core_seconds = 0.0;
  double busy_mark_s = 0.0;
};

class EventHandler {
public:
  virtual ~EventHandler() = default;
  virtual void on_job_arrival(std::uint64_t job_id) = 0;
  /// Fired when a flow has fully delivered (bytes drained plus link latency).
  virtual void on_transfer_complete(std::uint64_t flow_id) = 0;
  virtual void on_compute_complete(std::uint64_t job_id, std::int32_t site) = 0;
  virtual void on_overhead_elapsed(std::uint64_t job_id, std::int32_t site) = 0;
  virtual void on_snapshot_tick() = 0;
};

/// work / (cores * speed_per_core); the exact arithmetic contract calibration
/// relies on. Zero work yields zero seconds.
inline double compute_duration(const Job& job, const SiteSpec& site) {
  return job.work / (static_cast<double>(job.cores) * site.speed_per_core);
}

/// Single-threaded discrete-event core: virtual clock, (time, seq)-ordered
/// event queue, per-site resource accounting, and fluid equal-share bandwidth
/// on each site uplink.
class Engine {
public:
  explicit Engine(const PlatformSpec& platform);

  double now() const { return now_; }

  int site_count() const { return static_cast<int>(sites_.size()); }
  /// Sites are held in lexicographic name order; -1 when unknown.
  int site_index(const std::string& name) const;
  SiteState& site(int index) { return sites_[index]; }
  const SiteState& site(int index) const { return sites_[index]; }

  /// Enqueue with the next global sequence number. Throws TimeTravel if the
  /// event lies in the past.
  void schedule(SimEvent event);

  void schedule_job_arrival(double time_s, std::uint64_t job_id);
  void schedule_compute_complete(double time_s, std::uint64_t job_id, std::int32_t site);
  void schedule_overhead_elapsed(double time_s, std::uint64_t job_id, std::int32_t site);
  void schedule_snapshot_tick(double time_s);

  /// True and both counters decremented iff the site currently has the cores
  /// and memory free.
  bool reserve(std::int32_t site, std::int64_t cores, double memory_mb);
  /// Returns the resources and synchronously invokes the resource-freed hook.
  void release(std::int32_t site, std::int64_t cores, double memory_mb);
  void set_resource_freed_hook(std::function<void(std::int32_t)> hook) {
    resource_freed_hook_ = std::move(hook);
  }

  /// Start a transfer on the site's uplink. The flow joins the active set;
  /// every flow on the link is re-rated to bandwidth/n and rescheduled. The
  /// handler's on_transfer_complete fires at drain time + link latency.
  std::uint64_t open_flow(std::int32_t site, double bytes);

  const Flow* find_flow(std::uint64_t flow_id) const;
  std::size_t active_flow_count(std::int32_t site) const {
    return links_[site].active.size();
  }

  std::uint64_t pending_non_tick_events() const { return pending_non_tick_; }

  struct RunStats {
    double final_time_s = 0.0;
    bool truncated = false;
    std::uint64_t events_dispatched = 0;
  };

  /// Drain the queue (or stop just before the first event past stop_time_s).
  /// The probe, when set, runs after every dispatched event; tests use it to
  /// assert invariants at event boundaries.
  RunStats run(EventHandler& handler, std::optional<double> stop_time_s,
               const std::function<void()>& probe = {});

private:
  struct LinkState {
    double bandwidth_bps = 0.0;
    double latency_s = 0.0;
    std::vector<std::uint64_t> active;  // join order; deterministic iteration
  };

  struct EventAfter {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time_s != b.time_s) return a.time_s > b.time_s;
      return a.seq > b.seq;
    }
  };

  void touch_busy(SiteState& site);
  /// Snapshot progress and re-rate every flow on the link; reschedules each
  /// flow's drain event under a bumped generation.
  void reassign_rates(std::int32_t link);
  void handle_transfer_event(const SimEvent& event, EventHandler& handler);

  double now_ = 0.0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_flow_id_ = 1;
  std::uint64_t pending_non_tick_ = 0;
  bool running_ = false;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> queue_;
  std::vector<SiteState> sites_;
  std::vector<LinkState> links_;
  std::unordered_map<std::string, int> site_index_;
  std::unordered_map<std::uint64_t, Flow> flows_;
  std::function<void(std::int32_t)> resource_freed_hook_;
};

}  // namespace gridweave
