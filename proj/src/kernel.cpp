#include "gridweave/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "gridweave/errors.hpp"

namespace gridweave {

Engine::Engine(const PlatformSpec& platform) {
  sites_.reserve(platform.sites.size());
  for (const auto& spec : platform.sites) {
    SiteState state;
    state.spec = spec;
    state.total_cores = spec.total_cores();
    state.total_memory_mb = spec.total_memory_mb();
    state.free_cores = state.total_cores;
    state.free_memory_mb = state.total_memory_mb;
    sites_.push_back(std::move(state));
  }
  std::sort(sites_.begin(), sites_.end(),
            [](const SiteState& a, const SiteState& b) { return a.spec.name < b.spec.name; });
  links_.resize(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    site_index_[sites_[i].spec.name] = static_cast<int>(i);
    links_[i].bandwidth_bps = sites_[i].spec.uplink_bandwidth_bps;
    links_[i].latency_s = sites_[i].spec.uplink_latency_s;
  }
}

int Engine::site_index(const std::string& name) const {
  auto it = site_index_.find(name);
  return it == site_index_.end() ? -1 : it->second;
}

void Engine::schedule(SimEvent event) {
  if (event.time_s < now_)
    throw runtime_error_of("TimeTravel", "event scheduled in the past");
  event.seq = next_seq_++;
  if (event.kind != EventType::SnapshotTick) ++pending_non_tick_;
  queue_.push(event);
}

void Engine::schedule_job_arrival(double time_s, std::uint64_t job_id) {
  SimEvent ev;
  ev.time_s = time_s;
  ev.kind = EventType::JobArrival;
  ev.job_id = job_id;
  schedule(ev);
}

void Engine::schedule_compute_complete(double time_s, std::uint64_t job_id, std::int32_t site) {
  SimEvent ev;
  ev.time_s = time_s;
  ev.kind = EventType::ComputeComplete;
  ev.job_id = job_id;
  ev.site = site;
  schedule(ev);
}

void Engine::schedule_overhead_elapsed(double time_s, std::uint64_t job_id, std::int32_t site) {
  SimEvent ev;
  ev.time_s = time_s;
  ev.kind = EventType::OverheadElapsed;
  ev.job_id = job_id;
  ev.site = site;
  schedule(ev);
}

void Engine::schedule_snapshot_tick(double time_s) {
  SimEvent ev;
  ev.time_s = time_s;
  ev.kind = EventType::SnapshotTick;
  schedule(ev);
}

void Engine::touch_busy(SiteState& site) {
  site.busy_core_seconds +=
      static_cast<double>(site.total_cores - site.free_cores) * (now_ - site.busy_mark_s);
  site.busy_mark_s = now_;
}

bool Engine::reserve(std::int32_t site_idx, std::int64_t cores, double memory_mb) {
  if (cores < 0 || memory_mb < 0)
    throw runtime_error_of("InvalidReservation", "negative reservation request");
  SiteState& s = sites_[site_idx];
  if (s.free_cores < cores || s.free_memory_mb < memory_mb) return false;
  touch_busy(s);
  s.free_cores -= cores;
  s.free_memory_mb -= memory_mb;
  return true;
}

void Engine::release(std::int32_t site_idx, std::int64_t cores, double memory_mb) {
  SiteState& s = sites_[site_idx];
  touch_busy(s);
  s.free_cores += cores;
  s.free_memory_mb += memory_mb;
  if (s.free_cores > s.total_cores || s.free_memory_mb > s.total_memory_mb + 1e-9)
    throw runtime_error_of("ReleaseUnderflow",
                           "release exceeds reservations at " + s.spec.name);
  if (resource_freed_hook_) resource_freed_hook_(site_idx);
}

std::uint64_t Engine::open_flow(std::int32_t site_idx, double bytes) {
  if (site_idx < 0 || site_idx >= static_cast<int>(sites_.size()))
    throw runtime_error_of("UnknownSite", "open_flow on unknown site index");
  if (bytes < 0) throw runtime_error_of("InvalidFlow", "negative flow size");

  Flow flow;
  flow.id = next_flow_id_++;
  flow.link = site_idx;
  flow.total_bytes = bytes;
  flow.started_at_s = now_;
  flow.progress_mark_s = now_;
  flow.latency_s = links_[site_idx].latency_s;
  flows_.emplace(flow.id, flow);
  links_[site_idx].active.push_back(flow.id);
  reassign_rates(site_idx);
  return flow.id;
}

const Flow* Engine::find_flow(std::uint64_t flow_id) const {
  auto it = flows_.find(flow_id);
  return it == flows_.end() ? nullptr : &it->second;
}

void Engine::reassign_rates(std::int32_t link_idx) {
  LinkState& link = links_[link_idx];
  if (link.active.empty()) return;
  const double share = link.bandwidth_bps / static_cast<double>(link.active.size());
  for (std::uint64_t fid : link.active) {
    Flow& f = flows_.at(fid);
    f.transferred_bytes = std::min(
        f.total_bytes, f.transferred_bytes + f.rate_bps * (now_ - f.progress_mark_s));
    f.progress_mark_s = now_;
    f.rate_bps = share;
    const double remaining = std::max(0.0, f.total_bytes - f.transferred_bytes);
    ++f.generation;
    SimEvent ev;
    ev.time_s = now_ + remaining / share;
    ev.kind = EventType::TransferComplete;
    ev.flow_id = fid;
    ev.flow_generation = f.generation;
    schedule(ev);
  }
}

void Engine::handle_transfer_event(const SimEvent& event, EventHandler& handler) {
  auto it = flows_.find(event.flow_id);
  if (it == flows_.end() || it->second.generation != event.flow_generation)
    return;  // superseded by a later rate change
  Flow& f = it->second;
  if (!f.drained) {
    // Bytes are done: leave the active set, re-rate the survivors, then run
    // the one-time latency leg under a fresh generation.
    f.drained = true;
    f.transferred_bytes = f.total_bytes;
    f.rate_bps = 0.0;
    auto& active = links_[f.link].active;
    active.erase(std::find(active.begin(), active.end(), f.id));
    reassign_rates(f.link);
    ++f.generation;
    SimEvent delivery;
    delivery.time_s = now_ + f.latency_s;
    delivery.kind = EventType::TransferComplete;
    delivery.flow_id = f.id;
    delivery.flow_generation = f.generation;
    schedule(delivery);
  } else {
    const std::uint64_t fid = f.id;
    flows_.erase(it);
    handler.on_transfer_complete(fid);
  }
}

Engine::RunStats Engine::run(EventHandler& handler, std::optional<double> stop_time_s,
                             const std::function<void()>& probe) {
  if (running_) throw runtime_error_of("ReentrantRun", "run() is not reentrant");
  running_ = true;
  RunStats stats;

  while (!queue_.empty()) {
    const SimEvent event = queue_.top();
    if (stop_time_s && event.time_s > *stop_time_s) break;
    queue_.pop();
    if (event.kind != EventType::SnapshotTick) --pending_non_tick_;
    if (event.time_s < now_)
      throw runtime_error_of("ClockRegression", "event queue yielded a past event");
    now_ = event.time_s;
    ++stats.events_dispatched;

    switch (event.kind) {
      case EventType::JobArrival:
        handler.on_job_arrival(event.job_id);
        break;
      case EventType::TransferComplete:
        handle_transfer_event(event, handler);
        break;
      case EventType::ComputeComplete:
        handler.on_compute_complete(event.job_id, event.site);
        break;
      case EventType::OverheadElapsed:
        handler.on_overhead_elapsed(event.job_id, event.site);
        break;
      case EventType::SnapshotTick:
        handler.on_snapshot_tick();
        break;
    }
    if (probe) probe();
  }

  stats.truncated = stop_time_s.has_value() && !queue_.empty();
  stats.final_time_s = stats.truncated ? *stop_time_s : now_;
  now_ = stats.final_time_s;
  for (auto& site : sites_) touch_busy(site);
  running_ = false;
  return stats;
}

}  // namespace gridweave
