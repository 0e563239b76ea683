#include "gridweave/workload.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "gridweave/num_io.hpp"
#include "gridweave/rng.hpp"
#include "gridweave/simulation.hpp"

namespace gridweave {

namespace {

constexpr const char* kTraceHeader =
    "job_id,submit_time_s,work,cores,memory_mb,input_bytes,output_bytes,"
    "target_site,truth_walltime_s,truth_queue_time_s";

std::vector<std::string_view> split_csv(std::string_view line) {
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

Error malformed(std::size_t line_no, const std::string& what) {
  return workload_error("MalformedRow", "line " + std::to_string(line_no) + ": " + what);
}

double parse_field_double(std::string_view text, std::size_t line_no, const char* what) {
  double v;
  if (!parse_double(text, v))
    throw malformed(line_no, std::string("cannot parse ") + what + " '" + std::string(text) + "'");
  return v;
}

}  // namespace

std::string to_string(JobState state) {
  switch (state) {
    case JobState::Pending: return "pending";
    case JobState::Assigned: return "assigned";
    case JobState::Running: return "running";
    case JobState::Finished: return "finished";
    case JobState::Failed: return "failed";
  }
  return "?";
}

std::optional<JobState> job_state_from_string(const std::string& text) {
  if (text == "pending") return JobState::Pending;
  if (text == "assigned") return JobState::Assigned;
  if (text == "running") return JobState::Running;
  if (text == "finished") return JobState::Finished;
  if (text == "failed") return JobState::Failed;
  return std::nullopt;
}

std::vector<Job> parse_trace_text(const std::string& text) {
  std::vector<Job> jobs;
  std::unordered_set<std::uint64_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kTraceHeader) throw malformed(1, "unexpected trace header");
      continue;
    }
    if (line.empty()) continue;

    auto f = split_csv(line);
    if (f.size() != 10)
      throw malformed(line_no, "expected 10 columns, got " + std::to_string(f.size()));

    Job job;
    if (!parse_u64(f[0], job.id)) throw malformed(line_no, "bad job_id");
    if (!seen.insert(job.id).second)
      throw workload_error("DuplicateJobId", "duplicate job id " + std::to_string(job.id) +
                                                 " at line " + std::to_string(line_no));
    job.submit_time_s = parse_field_double(f[1], line_no, "submit_time_s");
    job.work = parse_field_double(f[2], line_no, "work");
    std::int64_t cores;
    if (!parse_i64(f[3], cores)) throw malformed(line_no, "bad cores");
    job.cores = cores;
    job.memory_mb = parse_field_double(f[4], line_no, "memory_mb");
    job.input_bytes = parse_field_double(f[5], line_no, "input_bytes");
    job.output_bytes = parse_field_double(f[6], line_no, "output_bytes");
    job.target_site = std::string(f[7]);
    if (!f[8].empty()) job.truth_walltime_s = parse_field_double(f[8], line_no, "truth_walltime_s");
    if (!f[9].empty())
      job.truth_queue_time_s = parse_field_double(f[9], line_no, "truth_queue_time_s");

    if (job.submit_time_s < 0) throw malformed(line_no, "submit_time_s must be >= 0");
    if (job.work < 0) throw malformed(line_no, "work must be >= 0");
    if (job.cores < 1) throw malformed(line_no, "cores must be >= 1");
    if (job.memory_mb < 0) throw malformed(line_no, "memory_mb must be >= 0");
    if (job.input_bytes < 0 || job.output_bytes < 0)
      throw malformed(line_no, "io bytes must be >= 0");

    jobs.push_back(std::move(job));
  }
  if (line_no == 0) throw malformed(1, "empty file, expected trace header");

  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return std::tie(a.submit_time_s, a.id) < std::tie(b.submit_time_s, b.id);
  });
  return jobs;
}

std::vector<Job> parse_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw workload_error("MissingFile", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_text(buf.str());
}

std::string trace_to_text(const std::vector<Job>& jobs) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& j : jobs) {
    out += std::to_string(j.id);
    out += ',';
    out += format_double(j.submit_time_s);
    out += ',';
    out += format_double(j.work);
    out += ',';
    out += std::to_string(j.cores);
    out += ',';
    out += format_double(j.memory_mb);
    out += ',';
    out += format_double(j.input_bytes);
    out += ',';
    out += format_double(j.output_bytes);
    out += ',';
    out += j.target_site;
    out += ',';
    if (j.truth_walltime_s) out += format_double(*j.truth_walltime_s);
    out += ',';
    if (j.truth_queue_time_s) out += format_double(*j.truth_queue_time_s);
    out += '\n';
  }
  return out;
}

void write_trace(const std::string& path, const std::vector<Job>& jobs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("WriteFailed", "cannot write " + path);
  out << trace_to_text(jobs);
  if (!out) throw io_error("WriteFailed", "error writing " + path);
}

std::vector<Job> generate_workload(const WorkloadGenSpec& spec) {
  if (spec.n_sites < 1 || spec.jobs_per_site < 1)
    throw workload_error("InvalidSpec", "n_sites and jobs_per_site must be >= 1");
  if (!(spec.work_min >= 0) || !(spec.work_max >= spec.work_min))
    throw workload_error("InvalidSpec", "work range must satisfy 0 <= min <= max");
  if (!(spec.io_min_bytes >= 0) || !(spec.io_max_bytes >= spec.io_min_bytes))
    throw workload_error("InvalidSpec", "io range must satisfy 0 <= min <= max");
  if (!(spec.interarrival_mean_s > 0))
    throw workload_error("InvalidSpec", "interarrival_mean_s must be > 0");
  if (spec.cores_choices.empty())
    throw workload_error("InvalidSpec", "cores_choices must be non-empty");
  for (auto c : spec.cores_choices)
    if (c < 1) throw workload_error("InvalidSpec", "cores_choices entries must be >= 1");

  const std::int64_t total = spec.n_sites * spec.jobs_per_site;
  Rng rng(spec.seed);
  std::vector<Job> jobs;
  jobs.reserve(total);
  double clock = 0.0;
  for (std::int64_t i = 0; i < total; ++i) {
    Job job;
    job.id = static_cast<std::uint64_t>(i + 1);
    clock += rng.exponential(spec.interarrival_mean_s);
    job.submit_time_s = clock;
    job.work = rng.uniform(spec.work_min, spec.work_max);
    job.cores = spec.cores_choices[rng.below(spec.cores_choices.size())];
    job.memory_mb = 0.0;
    job.input_bytes = rng.uniform(spec.io_min_bytes, spec.io_max_bytes);
    job.output_bytes = rng.uniform(spec.io_min_bytes, spec.io_max_bytes);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::vector<Job> synthesize_truth(const std::vector<Job>& jobs, const PlatformSpec& platform,
                                  const std::map<std::uint64_t, std::string>& assignment) {
  std::vector<Job> out = jobs;
  for (auto& job : out) {
    auto it = assignment.find(job.id);
    if (it == assignment.end())
      throw workload_error("UnknownSite",
                           "job " + std::to_string(job.id) + " has no assigned site");
    const SiteSpec* site = platform.find_site(it->second);
    if (!site)
      throw workload_error("UnknownSite", "job " + std::to_string(job.id) +
                                              " assigned to unknown site '" + it->second + "'");
    job.target_site = site->name;
    job.truth_walltime_s =
        job.work / (static_cast<double>(job.cores) * site->speed_per_core);
  }

  SimulationOptions options;
  options.policy = "replay";
  SimulationResult reference = run_simulation(platform, out, options);

  std::unordered_map<std::uint64_t, double> queue_by_id;
  for (const auto& outcome : reference.jobs) {
    if (outcome.state != JobState::Finished)
      throw runtime_error_of("TruthSynthesisFailed",
                             "job " + std::to_string(outcome.id) +
                                 " did not finish in the reference run");
    queue_by_id[outcome.id] = outcome.sim_queue_time_s.value_or(0.0);
  }
  for (auto& job : out) job.truth_queue_time_s = queue_by_id.at(job.id);
  return out;
}

}  // namespace gridweave
