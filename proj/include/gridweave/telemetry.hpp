#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gridweave/workload.hpp"

namespace gridweave {

/// One row of the event-level dataset: a job state transition plus the named
/// site's counters sampled immediately after the transition. Global records
/// (Pending, unsatisfiable Failed) carry an empty site and zero site counters.
struct EventRecord {
  std::uint64_t event_id = 0;
  double sim_time_s = 0.0;
  std::uint64_t job_id = 0;
  JobState state = JobState::Pending;
  std::string site;
  std::int64_t available_cores = 0;
  std::int64_t pending_jobs = 0;  // global pending-list size
  std::int64_t assigned_jobs = 0;
  std::int64_t finished_jobs = 0;
};

/// Append-only transition log with legality checking and monotonic ids.
class TelemetryLog {
public:
  /// Throws IllegalTransition unless the move is one of Pending→Assigned,
  /// Assigned→Running, Running→Finished, {Pending,Assigned,Running}→Failed,
  /// or the job's first appearance entering Pending.
  const EventRecord& record_transition(std::uint64_t job_id, JobState new_state,
                                       double sim_time_s, const std::string& site,
                                       std::int64_t available_cores, std::int64_t pending_jobs,
                                       std::int64_t assigned_jobs, std::int64_t finished_jobs);

  const std::vector<EventRecord>& records() const { return records_; }
  std::vector<EventRecord> take_records() { return std::move(records_); }

private:
  std::vector<EventRecord> records_;
  std::unordered_map<std::uint64_t, JobState> last_state_;
  std::uint64_t next_event_id_ = 1;
  double last_time_s_ = 0.0;
};

enum class ExportFormat { Csv, Jsonl };

std::string event_log_to_csv(const std::vector<EventRecord>& records);
std::string event_log_to_jsonl(const std::vector<EventRecord>& records);
void export_event_log(const std::vector<EventRecord>& records, ExportFormat format,
                      const std::string& path);

/// Lossless inverses of the exporters.
std::vector<EventRecord> parse_event_log_csv(const std::string& text);
std::vector<EventRecord> parse_event_log_jsonl(const std::string& text);
std::vector<EventRecord> import_event_log(const std::string& path, ExportFormat format);

/// Mean over jobs of |sim - truth| / truth. Throws EmptySite on an empty list
/// and NonPositiveTruth when any truth ≤ 0.
double rel_mae(const std::vector<std::pair<double, double>>& sim_truth_pairs);

/// exp(mean(log(values))). Throws NonPositiveValue (empty list included).
double geomean(const std::vector<double>& values);

/// Geomean with the zero-clamp rule used for site aggregates: values of
/// exactly 0 enter as 1e-6; clamped reports whether any did.
double geomean_clamped(const std::vector<double>& values, bool* clamped = nullptr);

/// Time-bucketed utilization (total-available)/total reconstructed from the
/// log's piecewise-constant available_cores for one site. Buckets are
/// [k*bucket_s, (k+1)*bucket_s) over the log's full time span; the integral is
/// exact, the final partial bucket is normalized by the full bucket width so
/// that sum(value)*bucket_s*total_cores equals integrated busy-core-seconds.
std::vector<std::pair<double, double>> utilization_series(
    const std::vector<EventRecord>& records, const std::string& site, double bucket_s,
    std::int64_t total_cores);

}  // namespace gridweave
