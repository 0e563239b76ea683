#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridweave/rng.hpp"
#include "gridweave/simulation.hpp"
#include "gridweave/telemetry.hpp"
#include "support/helpers.hpp"

using namespace gridweave;
using testsupport::make_job;
using testsupport::make_platform;
using testsupport::make_site;

namespace {

PlatformSpec random_platform(Rng& rng) {
  const int n_sites = 1 + static_cast<int>(rng.below(4));
  std::vector<SiteSpec> sites;
  for (int i = 0; i < n_sites; ++i) {
    sites.push_back(make_site("site_" + std::to_string(i), 1 + static_cast<std::int64_t>(rng.below(3)),
                              1 + static_cast<std::int64_t>(rng.below(4)),
                              rng.log_uniform(5e8, 5e9), 4000.0, rng.log_uniform(1e7, 1e9),
                              rng.uniform01() < 0.5 ? 0.0 : 0.01,
                              rng.uniform01() < 0.5 ? 0.0 : rng.uniform(0.0, 5.0)));
  }
  return make_platform(std::move(sites));
}

std::vector<Job> random_jobs(Rng& rng, const PlatformSpec& platform) {
  std::int64_t max_cores = 0;
  for (const auto& s : platform.sites) max_cores = std::max(max_cores, s.total_cores());

  const int n = 10 + static_cast<int>(rng.below(51));
  std::vector<Job> jobs;
  double clock = 0.0;
  for (int i = 0; i < n; ++i) {
    clock += rng.exponential(1.0);
    Job job = make_job(static_cast<std::uint64_t>(i + 1), clock, rng.log_uniform(1e8, 2e10),
                       1 + static_cast<std::int64_t>(rng.below(max_cores + 1)));
    if (rng.uniform01() < 0.1) job.cores = max_cores + 2;  // nothing can run this one
    if (rng.uniform01() < 0.3) job.memory_mb = rng.uniform(0.0, 2000.0);
    if (rng.uniform01() < 0.3) {
      job.input_bytes = rng.log_uniform(1e5, 1e8);
      job.output_bytes = rng.log_uniform(1e5, 1e8);
    }
    jobs.push_back(job);
  }
  return jobs;
}

}  // namespace

TEST_CASE("randomized instances hold the conservation and transition invariants") {
  const char* policies[] = {"first_fit", "least_loaded", "round_robin"};
  Rng rng(4711);

  for (int instance = 0; instance < 50; ++instance) {
    auto platform = random_platform(rng);
    auto jobs = random_jobs(rng, platform);

    SimulationOptions options;
    options.policy = policies[instance % 3];
    options.seed = rng.next_u64();

    std::vector<JobState> previous(jobs.size(), JobState::Pending);
    long violations = 0;
    std::int64_t last_busy_cores = -1;
    auto probe = [&](const ProbeView& view) {
      std::int64_t busy_cores = 0;
      double busy_memory = 0.0;
      for (int s = 0; s < view.engine->site_count(); ++s) {
        const SiteState& site = view.engine->site(s);
        if (site.free_cores < 0 || site.free_cores > site.total_cores) ++violations;
        if (site.free_memory_mb < -1e-9 || site.free_memory_mb > site.total_memory_mb + 1e-9)
          ++violations;
        busy_cores += site.total_cores - site.free_cores;
        busy_memory += site.total_memory_mb - site.free_memory_mb;
      }
      last_busy_cores = busy_cores;

      std::int64_t running_cores = 0;
      double running_memory = 0.0;
      for (std::size_t j = 0; j < view.job_states->size(); ++j) {
        if ((*view.job_states)[j] == JobState::Running) {
          running_cores += jobs[j].cores;
          running_memory += jobs[j].memory_mb;
        }
      }
      // Every busy core belongs to some Running job. Equality cannot be
      // asserted: cores are freed at compute end while the job stays Running
      // through stage-out.
      if (busy_cores > running_cores) ++violations;
      if (busy_memory > running_memory + 1e-6) ++violations;

      for (std::size_t j = 0; j < previous.size(); ++j) {
        const JobState was = previous[j];
        const JobState is = (*view.job_states)[j];
        if (was == is) continue;
        const bool legal = (was == JobState::Pending && is == JobState::Assigned) ||
                           (was == JobState::Assigned && is == JobState::Running) ||
                           (was == JobState::Running && is == JobState::Finished) ||
                           ((was == JobState::Pending || was == JobState::Assigned ||
                             was == JobState::Running) &&
                            is == JobState::Failed);
        if (!legal) ++violations;
        previous[j] = is;
      }
    };

    auto result = run_simulation(platform, jobs, options, default_policy_registry(), probe);

    CHECK(violations == 0);
    CHECK(last_busy_cores == 0);  // everything reserved was given back
    CHECK(result.total_jobs == static_cast<std::int64_t>(jobs.size()));
    CHECK(result.finished_jobs + result.failed_jobs == result.total_jobs);
    CHECK_FALSE(result.truncated);

    std::uint64_t last_id = 0;
    double last_time = 0.0;
    bool ordered = true;
    std::map<std::uint64_t, int> per_job_records;
    for (const auto& r : result.events) {
      if (r.event_id <= last_id) ordered = false;
      if (r.sim_time_s < last_time) ordered = false;
      last_id = r.event_id;
      last_time = r.sim_time_s;
      ++per_job_records[r.job_id];
    }
    CHECK(ordered);

    // Every job enters Pending and each state at most once: 2 to 4 records.
    for (const auto& job : jobs) {
      auto it = per_job_records.find(job.id);
      REQUIRE(it != per_job_records.end());
      CHECK(it->second >= 2);
      CHECK(it->second <= 4);
    }
  }
}

namespace {

struct RefStart {
  double start = 0.0;
  double end = 0.0;
};

// Independent single-site FIFO oracle for one-core jobs with no I/O and no
// overhead: a time-ordered sweep over arrivals and completions, starting the
// queue head whenever a core is free. No event queue, no broker machinery.
std::map<std::uint64_t, RefStart> fifo_reference(std::int64_t total_cores,
                                                 const SiteSpec& site,
                                                 std::vector<Job> jobs) {
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    if (a.submit_time_s != b.submit_time_s) return a.submit_time_s < b.submit_time_s;
    return a.id < b.id;
  });

  std::map<std::uint64_t, RefStart> out;
  std::deque<std::uint64_t> queue;
  std::priority_queue<double, std::vector<double>, std::greater<>> completions;
  std::map<std::uint64_t, double> duration;
  for (const auto& j : jobs) duration[j.id] = j.work / site.speed_per_core;

  std::size_t next = 0;
  std::int64_t free = total_cores;
  while (next < jobs.size() || !completions.empty() || !queue.empty()) {
    double t;
    const double next_arrival =
        next < jobs.size() ? jobs[next].submit_time_s : std::numeric_limits<double>::infinity();
    const double next_done =
        completions.empty() ? std::numeric_limits<double>::infinity() : completions.top();
    t = std::min(next_arrival, next_done);

    while (next < jobs.size() && jobs[next].submit_time_s == t) queue.push_back(jobs[next++].id);
    while (!completions.empty() && completions.top() == t) {
      completions.pop();
      ++free;
    }
    while (!queue.empty() && free > 0) {
      const std::uint64_t id = queue.front();
      queue.pop_front();
      --free;
      out[id] = {t, t + duration[id]};
      completions.push(out[id].end);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("single-site one-core schedules match an independent FIFO sweep exactly") {
  Rng rng(90210);
  for (int instance = 0; instance < 20; ++instance) {
    auto site = make_site("only", 1, 1 + static_cast<std::int64_t>(rng.below(4)),
                          rng.log_uniform(5e8, 5e9), 4000.0, 1e9, 0.0, 0.0);
    auto platform = make_platform({site});

    std::vector<Job> jobs;
    double clock = 0.0;
    const int n = 10 + static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) {
      clock += rng.exponential(2.0);
      jobs.push_back(make_job(static_cast<std::uint64_t>(i + 1), clock,
                              rng.log_uniform(1e9, 2e10), 1));
    }

    auto expected = fifo_reference(site.total_cores(), site, jobs);
    auto result = run_simulation(platform, jobs);

    REQUIRE(result.finished_jobs == static_cast<std::int64_t>(jobs.size()));
    for (const auto& o : result.jobs) {
      REQUIRE(expected.count(o.id) == 1);
      // Same arithmetic on both sides, so equality is exact.
      CHECK(*o.running_s == expected[o.id].start);
      CHECK(*o.terminal_s == expected[o.id].end);
    }
  }
}

TEST_CASE("identical seeds give byte-identical event logs") {
  Rng rng(1234);
  auto platform = random_platform(rng);
  auto jobs = random_jobs(rng, platform);

  SimulationOptions options;
  options.policy = "round_robin";
  options.seed = 77;

  auto a = run_simulation(platform, jobs, options);
  auto b = run_simulation(platform, jobs, options);
  CHECK(event_log_to_csv(a.events) == event_log_to_csv(b.events));
}
