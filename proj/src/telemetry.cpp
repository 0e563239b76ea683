#include "gridweave/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridweave/errors.hpp"
#include "gridweave/num_io.hpp"

namespace gridweave {

namespace {

constexpr const char* kLogHeader =
    "event_id,sim_time_s,job_id,state,site,available_cores,pending_jobs,assigned_jobs,"
    "finished_jobs";

bool legal_transition(JobState from, JobState to) {
  switch (from) {
    case JobState::Pending:
      return to == JobState::Assigned || to == JobState::Failed;
    case JobState::Assigned:
      return to == JobState::Running || to == JobState::Failed;
    case JobState::Running:
      return to == JobState::Finished || to == JobState::Failed;
    case JobState::Finished:
    case JobState::Failed:
      return false;
  }
  return false;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

const EventRecord& TelemetryLog::record_transition(std::uint64_t job_id, JobState new_state,
                                                   double sim_time_s, const std::string& site,
                                                   std::int64_t available_cores,
                                                   std::int64_t pending_jobs,
                                                   std::int64_t assigned_jobs,
                                                   std::int64_t finished_jobs) {
  auto it = last_state_.find(job_id);
  if (it == last_state_.end()) {
    if (new_state != JobState::Pending)
      throw runtime_error_of("IllegalTransition",
                             "job " + std::to_string(job_id) + " must enter pending first");
  } else if (!legal_transition(it->second, new_state)) {
    throw runtime_error_of("IllegalTransition",
                           "job " + std::to_string(job_id) + ": " + to_string(it->second) +
                               " -> " + to_string(new_state));
  }
  if (sim_time_s < last_time_s_)
    throw runtime_error_of("IllegalTransition", "record time regressed");
  last_time_s_ = sim_time_s;
  last_state_[job_id] = new_state;

  EventRecord rec;
  rec.event_id = next_event_id_++;
  rec.sim_time_s = sim_time_s;
  rec.job_id = job_id;
  rec.state = new_state;
  rec.site = site;
  rec.available_cores = available_cores;
  rec.pending_jobs = pending_jobs;
  rec.assigned_jobs = assigned_jobs;
  rec.finished_jobs = finished_jobs;
  records_.push_back(std::move(rec));
  return records_.back();
}

std::string event_log_to_csv(const std::vector<EventRecord>& records) {
  std::string out(kLogHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.event_id);
    out += ',';
    out += format_double(r.sim_time_s);
    out += ',';
    out += std::to_string(r.job_id);
    out += ',';
    out += to_string(r.state);
    out += ',';
    out += r.site;
    out += ',';
    out += std::to_string(r.available_cores);
    out += ',';
    out += std::to_string(r.pending_jobs);
    out += ',';
    out += std::to_string(r.assigned_jobs);
    out += ',';
    out += std::to_string(r.finished_jobs);
    out += '\n';
  }
  return out;
}

std::string event_log_to_jsonl(const std::vector<EventRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json row = {
        {"event_id", r.event_id},
        {"sim_time_s", r.sim_time_s},
        {"job_id", r.job_id},
        {"state", to_string(r.state)},
        {"site", r.site},
        {"available_cores", r.available_cores},
        {"pending_jobs", r.pending_jobs},
        {"assigned_jobs", r.assigned_jobs},
        {"finished_jobs", r.finished_jobs},
    };
    out += row.dump();
    out += '\n';
  }
  return out;
}

void export_event_log(const std::vector<EventRecord>& records, ExportFormat format,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("IoError", "cannot write " + path);
  out << (format == ExportFormat::Csv ? event_log_to_csv(records)
                                      : event_log_to_jsonl(records));
  if (!out) throw io_error("IoError", "error writing " + path);
}

std::vector<EventRecord> parse_event_log_csv(const std::string& text) {
  std::vector<EventRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kLogHeader)
        throw io_error("MalformedLog", "line 1: unexpected event-log header");
      continue;
    }
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 9)
      throw io_error("MalformedLog",
                     "line " + std::to_string(line_no) + ": expected 9 columns");
    EventRecord r;
    auto fail = [&](const char* what) {
      return io_error("MalformedLog", "line " + std::to_string(line_no) + ": bad " + what);
    };
    if (!parse_u64(f[0], r.event_id)) throw fail("event_id");
    if (!parse_double(f[1], r.sim_time_s)) throw fail("sim_time_s");
    if (!parse_u64(f[2], r.job_id)) throw fail("job_id");
    auto state = job_state_from_string(std::string(f[3]));
    if (!state) throw fail("state");
    r.state = *state;
    r.site = std::string(f[4]);
    if (!parse_i64(f[5], r.available_cores)) throw fail("available_cores");
    if (!parse_i64(f[6], r.pending_jobs)) throw fail("pending_jobs");
    if (!parse_i64(f[7], r.assigned_jobs)) throw fail("assigned_jobs");
    if (!parse_i64(f[8], r.finished_jobs)) throw fail("finished_jobs");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<EventRecord> parse_event_log_jsonl(const std::string& text) {
  std::vector<EventRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw io_error("MalformedLog", "line " + std::to_string(line_no) + ": " + e.what());
    }
    EventRecord r;
    try {
      r.event_id = row.at("event_id").get<std::uint64_t>();
      r.sim_time_s = row.at("sim_time_s").get<double>();
      r.job_id = row.at("job_id").get<std::uint64_t>();
      auto state = job_state_from_string(row.at("state").get<std::string>());
      if (!state) throw io_error("MalformedLog", "bad state");
      r.state = *state;
      r.site = row.at("site").get<std::string>();
      r.available_cores = row.at("available_cores").get<std::int64_t>();
      r.pending_jobs = row.at("pending_jobs").get<std::int64_t>();
      r.assigned_jobs = row.at("assigned_jobs").get<std::int64_t>();
      r.finished_jobs = row.at("finished_jobs").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw io_error("MalformedLog", "line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<EventRecord> import_event_log(const std::string& path, ExportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("MissingFile", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return format == ExportFormat::Csv ? parse_event_log_csv(buf.str())
                                     : parse_event_log_jsonl(buf.str());
}

double rel_mae(const std::vector<std::pair<double, double>>& sim_truth_pairs) {
  if (sim_truth_pairs.empty()) throw runtime_error_of("EmptySite", "rel_mae over empty list");
  double sum = 0.0;
  for (const auto& [sim, truth] : sim_truth_pairs) {
    if (!(truth > 0.0))
      throw runtime_error_of("NonPositiveTruth", "rel_mae requires truth > 0");
    sum += std::abs(sim - truth) / truth;
  }
  return sum / static_cast<double>(sim_truth_pairs.size());
}

double geomean(const std::vector<double>& values) {
  if (values.empty()) throw runtime_error_of("NonPositiveValue", "geomean of empty list");
  double log_sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw runtime_error_of("NonPositiveValue", "geomean requires values > 0");
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

double geomean_clamped(const std::vector<double>& values, bool* clamped) {
  std::vector<double> adjusted;
  adjusted.reserve(values.size());
  bool any = false;
  for (double v : values) {
    if (v == 0.0) {
      any = true;
      adjusted.push_back(1e-6);
    } else {
      adjusted.push_back(v);
    }
  }
  if (clamped) *clamped = any;
  return geomean(adjusted);
}

std::vector<std::pair<double, double>> utilization_series(
    const std::vector<EventRecord>& records, const std::string& site, double bucket_s,
    std::int64_t total_cores) {
  if (!(bucket_s > 0.0)) throw runtime_error_of("InvalidBucket", "bucket_s must be > 0");
  if (total_cores <= 0) throw runtime_error_of("UnknownSite", "site has no cores");

  double horizon = 0.0;
  for (const auto& r : records) horizon = std::max(horizon, r.sim_time_s);
  if (records.empty() || horizon == 0.0) return {};

  // Change points of the site's available_cores step function.
  std::vector<std::pair<double, std::int64_t>> steps;  // (time, available after)
  for (const auto& r : records)
    if (r.site == site) steps.emplace_back(r.sim_time_s, r.available_cores);

  const std::size_t n_buckets = static_cast<std::size_t>(std::ceil(horizon / bucket_s));
  std::vector<std::pair<double, double>> series;
  series.reserve(n_buckets);

  std::size_t step_idx = 0;
  std::int64_t available = total_cores;  // idle before the first record
  for (std::size_t b = 0; b < n_buckets; ++b) {
    const double t0 = static_cast<double>(b) * bucket_s;
    const double t1 = std::min(t0 + bucket_s, horizon);
    double busy_integral = 0.0;
    double cursor = t0;
    while (cursor < t1) {
      double next_change = t1;
      while (step_idx < steps.size() && steps[step_idx].first <= cursor) {
        available = steps[step_idx].second;
        ++step_idx;
      }
      if (step_idx < steps.size() && steps[step_idx].first < t1)
        next_change = steps[step_idx].first;
      busy_integral += static_cast<double>(total_cores - available) * (next_change - cursor);
      cursor = next_change;
      if (cursor == t1) break;
    }
    series.emplace_back(t0, busy_integral / (bucket_s * static_cast<double>(total_cores)));
  }
  return series;
}

}  // namespace gridweave
