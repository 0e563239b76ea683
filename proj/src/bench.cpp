#include "gridweave/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "gridweave/errors.hpp"
#include "gridweave/num_io.hpp"
#include "gridweave/simulation.hpp"
#include "gridweave/workload.hpp"

namespace gridweave {

namespace {

WorkloadGenSpec bench_workload_spec(int n_sites, std::int64_t jobs_per_site,
                                    std::uint64_t seed) {
  WorkloadGenSpec spec;
  spec.n_sites = n_sites;
  spec.jobs_per_site = jobs_per_site;
  spec.seed = seed;
  spec.work_min = 1e10;  // 2.5..40 s of compute at 1e9 per core
  spec.work_max = 4e10;
  spec.cores_choices = {1, 2, 4};
  spec.interarrival_mean_s = 0.2;
  spec.io_min_bytes = 1e6;
  spec.io_max_bytes = 1e8;
  return spec;
}

double time_one_run(const PlatformSpec& platform, const std::vector<Job>& jobs) {
  const auto start = std::chrono::steady_clock::now();
  SimulationOptions options;
  options.policy = "first_fit";
  run_simulation(platform, jobs, options);
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

BenchRow time_config(int sites, const PlatformSpec& platform, const std::vector<Job>& jobs,
                     int repeats) {
  std::vector<double> samples;
  samples.reserve(repeats);
  for (int r = 0; r < repeats; ++r) samples.push_back(time_one_run(platform, jobs));
  std::sort(samples.begin(), samples.end());
  BenchRow row;
  row.sites = sites;
  row.jobs = static_cast<std::int64_t>(jobs.size());
  row.runtime_s_min = samples.front();
  row.runtime_s_max = samples.back();
  const std::size_t n = samples.size();
  row.runtime_s_median =
      n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return row;
}

}  // namespace

PlatformSpec make_bench_platform(int n_sites) {
  if (n_sites < 1) throw config_error("InvalidBudget", "need at least one site");
  PlatformSpec platform;
  platform.sites.reserve(n_sites);
  for (int i = 0; i < n_sites; ++i) {
    SiteSpec site;
    char name[16];
    std::snprintf(name, sizeof(name), "site_%03d", i + 1);
    site.name = name;
    site.host_count = 64;
    site.cores_per_host = 4;
    site.speed_per_core = 1e9;
    site.memory_per_host_mb = 8000;
    site.disk_capacity_gb = 1000;
    site.uplink_bandwidth_bps = 1e9;
    site.uplink_latency_s = 1e-3;
    platform.sites.push_back(std::move(site));
  }
  return platform;
}

std::vector<BenchRow> run_site_sweep(int max_sites, int jobs_per_site, int repeats,
                                     std::uint64_t seed) {
  if (max_sites < 1 || jobs_per_site < 1 || repeats < 1)
    throw config_error("InvalidBudget", "site sweep needs positive sites, jobs, and repeats");
  std::vector<BenchRow> rows;
  rows.reserve(max_sites);
  for (int n = 1; n <= max_sites; ++n) {
    const PlatformSpec platform = make_bench_platform(n);
    const std::vector<Job> jobs = generate_workload(bench_workload_spec(n, jobs_per_site, seed));
    rows.push_back(time_config(n, platform, jobs, repeats));
  }
  return rows;
}

std::vector<BenchRow> run_job_sweep(std::int64_t min_jobs, std::int64_t max_jobs,
                                    std::int64_t step, int repeats, std::uint64_t seed) {
  if (min_jobs < 1 || max_jobs < min_jobs || step < 1 || repeats < 1)
    throw config_error("InvalidBudget", "job sweep needs a positive ascending range");
  const PlatformSpec platform = make_bench_platform(1);
  std::vector<BenchRow> rows;
  for (std::int64_t jobs = min_jobs; jobs <= max_jobs; jobs += step) {
    const std::vector<Job> trace = generate_workload(bench_workload_spec(1, jobs, seed));
    rows.push_back(time_config(1, platform, trace, repeats));
  }
  return rows;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2)
    throw config_error("InvalidBudget", "slope fit needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : xy) {
    if (x <= 0.0 || y <= 0.0)
      throw config_error("InvalidBudget", "slope fit needs positive coordinates");
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double num = 0.0;
  double den = 0.0;
  for (const auto& [x, y] : xy) {
    const double dx = std::log(x) - mx;
    num += dx * (std::log(y) - my);
    den += dx * dx;
  }
  if (den == 0.0) throw config_error("InvalidBudget", "slope fit needs distinct x values");
  return num / den;
}

std::string timing_csv(const std::vector<BenchRow>& rows) {
  std::string csv = "sites,jobs,runtime_s_min,runtime_s_median,runtime_s_max\n";
  for (const BenchRow& row : rows) {
    csv += std::to_string(row.sites);
    csv += ',';
    csv += std::to_string(row.jobs);
    csv += ',';
    csv += format_double(row.runtime_s_min);
    csv += ',';
    csv += format_double(row.runtime_s_median);
    csv += ',';
    csv += format_double(row.runtime_s_max);
    csv += '\n';
  }
  return csv;
}

}  // namespace gridweave
