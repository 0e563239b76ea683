#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "doctest.h"
#include "gridweave/kernel.hpp"
#include "gridweave/rng.hpp"
#include "support/fluid_reference.hpp"
#include "support/helpers.hpp"

using namespace gridweave;
using testsupport::make_platform;
using testsupport::make_site;
using testsupport::RefFlow;
using testsupport::reference_completion_times;

namespace {

// Drives one uplink: each scheduled arrival i+1 opens script[i]; completions
// are recorded at the engine clock.
class FlowDriver : public EventHandler {
public:
  FlowDriver(Engine& engine, std::vector<RefFlow> script)
      : engine_(engine), script_(std::move(script)), completed_(script_.size(), -1.0) {}

  void start() {
    for (std::size_t i = 0; i < script_.size(); ++i)
      engine_.schedule_job_arrival(script_[i].open_s, static_cast<std::uint64_t>(i + 1));
  }

  void on_job_arrival(std::uint64_t job_id) override {
    const std::size_t idx = static_cast<std::size_t>(job_id - 1);
    const std::uint64_t flow = engine_.open_flow(0, script_[idx].bytes);
    index_of_flow_[flow] = idx;
  }
  void on_transfer_complete(std::uint64_t flow_id) override {
    completed_[index_of_flow_.at(flow_id)] = engine_.now();
  }
  void on_compute_complete(std::uint64_t, std::int32_t) override { FAIL("unexpected event"); }
  void on_overhead_elapsed(std::uint64_t, std::int32_t) override { FAIL("unexpected event"); }
  void on_snapshot_tick() override { FAIL("unexpected event"); }

  const std::vector<double>& completed() const { return completed_; }

private:
  Engine& engine_;
  std::vector<RefFlow> script_;
  std::vector<double> completed_;
  std::map<std::uint64_t, std::size_t> index_of_flow_;
};

std::vector<double> run_schedule(double bandwidth_bps, double latency_s,
                                 const std::vector<RefFlow>& script) {
  auto platform =
      make_platform({make_site("link", 1, 1, 1e9, 1000, bandwidth_bps, latency_s)});
  Engine engine(platform);
  FlowDriver driver(engine, script);
  driver.start();
  engine.run(driver, std::nullopt);
  return driver.completed();
}

}  // namespace

TEST_CASE("a solo transfer finishes at open + bytes/bandwidth + latency") {
  auto done = run_schedule(1e8, 0.01, {{3.0, 1e8}});
  REQUIRE(done.size() == 1);
  CHECK(done[0] == doctest::Approx(4.01).epsilon(1e-9));
}

TEST_CASE("two simultaneous transfers each get half the link") {
  auto done = run_schedule(1e8, 0.0, {{0.0, 1e8}, {0.0, 1e8}});
  REQUIRE(done.size() == 2);
  CHECK(done[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(done[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("a staggered pair shares only while both are open") {
  auto done = run_schedule(1e8, 0.0, {{0.0, 1e8}, {0.5, 1e8}});
  REQUIRE(done.size() == 2);
  // First flow: full rate for 0.5 s, half rate until 1.5 s. Second flow: half
  // rate until 1.5 s, then full rate until 2.0 s.
  CHECK(done[0] == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(done[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("zero-byte flows complete after the latency alone") {
  auto done = run_schedule(1e8, 0.25, {{2.0, 0.0}});
  REQUIRE(done.size() == 1);
  CHECK(done[0] == doctest::Approx(2.25).epsilon(1e-12));

  auto instant = run_schedule(1e8, 0.0, {{2.0, 0.0}});
  CHECK(instant[0] == 2.0);
}

TEST_CASE("a zero-byte flow does not slow a concurrent transfer") {
  auto done = run_schedule(1e8, 0.0, {{0.0, 1e8}, {0.5, 0.0}});
  REQUIRE(done.size() == 2);
  CHECK(done[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(done[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("random schedules agree with the segment integrator") {
  Rng rng(20240817);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(8));
    const double latency = rng.uniform01() < 0.5 ? 0.0 : 0.05;
    std::vector<RefFlow> script;
    script.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      RefFlow f;
      f.open_s = rng.uniform(0.0, 5.0);
      f.bytes = rng.uniform01() < 0.1 ? 0.0 : rng.log_uniform(1e6, 1e9);
      script.push_back(f);
    }

    auto expected = reference_completion_times(1e8, latency, script);
    auto actual = run_schedule(1e8, latency, script);

    REQUIRE(actual.size() == expected.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double tol = 1e-9 * std::max(1.0, std::abs(expected[i]));
      CHECK(std::abs(actual[i] - expected[i]) <= tol);
    }
  }
}
