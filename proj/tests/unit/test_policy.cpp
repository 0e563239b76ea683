#include <string>
#include <vector>

#include "doctest.h"
#include "gridweave/errors.hpp"
#include "gridweave/policy.hpp"
#include "support/helpers.hpp"

using namespace gridweave;

namespace {

SiteView view_of(const std::string& name, std::int64_t total, std::int64_t free_cores,
                 double free_mem, std::int64_t queue = 0) {
  SiteView v;
  v.name = name;
  v.total_cores = total;
  v.free_cores = free_cores;
  v.free_memory_mb = free_mem;
  v.speed_per_core = 1e9;
  v.uplink_bandwidth_bps = 1e8;
  v.local_queue_length = queue;
  return v;
}

ResourceView grid(std::vector<SiteView> sites, std::int64_t pending = 0) {
  ResourceView view;
  view.sites = std::move(sites);
  view.pending_global = pending;
  return view;
}

std::unique_ptr<AllocationPolicy> make(const std::string& name, std::uint64_t seed = 0) {
  PlatformSpec dummy;
  return default_policy_registry().make(name, seed, dummy);
}

}  // namespace

TEST_CASE("first_fit scans name order and takes the first site that fits") {
  auto policy = make("first_fit");
  auto job = testsupport::make_job(1, 0, 1e9, 4, 2000);

  auto full = grid({view_of("a", 8, 2, 8000), view_of("b", 8, 8, 8000), view_of("c", 8, 8, 8000)});
  CHECK(policy->assign_job(job, full) == std::string("b"));

  auto tight_memory =
      grid({view_of("a", 8, 8, 1000), view_of("b", 8, 8, 1000), view_of("c", 8, 8, 4000)});
  CHECK(policy->assign_job(job, tight_memory) == std::string("c"));

  auto nothing = grid({view_of("a", 8, 2, 8000)});
  CHECK_FALSE(policy->assign_job(job, nothing).has_value());
}

TEST_CASE("least_loaded maximizes the free-core ratio with name-order ties") {
  auto policy = make("least_loaded");
  auto job = testsupport::make_job(1, 0, 1e9, 1, 0);

  auto mixed = grid({view_of("a", 8, 4, 8000), view_of("b", 16, 12, 8000), view_of("c", 4, 2, 8000)});
  CHECK(policy->assign_job(job, mixed) == std::string("b"));

  // 4/8 and 8/16 tie at 0.5; the earlier name wins.
  auto tied = grid({view_of("x", 8, 4, 8000), view_of("y", 16, 8, 8000)});
  CHECK(policy->assign_job(job, tied) == std::string("x"));

  auto job_too_big = testsupport::make_job(2, 0, 1e9, 32, 0);
  CHECK_FALSE(policy->assign_job(job_too_big, mixed).has_value());
}

TEST_CASE("replay returns the recorded target and demands one") {
  auto policy = make("replay");
  auto job = testsupport::make_job(1, 0, 1e9, 1, 0, 0, 0, "site-42");
  auto view = grid({view_of("other", 8, 8, 8000)});
  CHECK(policy->assign_job(job, view) == std::string("site-42"));

  auto blank = testsupport::make_job(2, 0, 1e9);
  bool threw = false;
  try {
    policy->assign_job(blank, view);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == std::string("MissingTargetSite"));
  }
  CHECK(threw);
}

TEST_CASE("round_robin starts at seed mod n and advances past its pick") {
  auto view = grid({view_of("a", 8, 8, 8000), view_of("b", 8, 8, 8000), view_of("c", 8, 8, 8000)});
  auto job = testsupport::make_job(1, 0, 1e9, 1, 0);

  auto policy = make("round_robin", 4);  // 4 % 3 == 1 → start at "b"
  policy->get_resource_information(view);
  CHECK(policy->assign_job(job, view) == std::string("b"));
  CHECK(policy->assign_job(job, view) == std::string("c"));
  CHECK(policy->assign_job(job, view) == std::string("a"));
  CHECK(policy->assign_job(job, view) == std::string("b"));
}

TEST_CASE("round_robin skips sites that cannot take the job right now") {
  auto view = grid({view_of("a", 8, 0, 8000), view_of("b", 8, 8, 8000), view_of("c", 8, 8, 8000)});
  auto job = testsupport::make_job(1, 0, 1e9, 1, 0);

  auto policy = make("round_robin", 0);  // would start at "a", which is full
  CHECK(policy->assign_job(job, view) == std::string("b"));
  CHECK(policy->assign_job(job, view) == std::string("c"));

  auto empty_grid = grid({view_of("a", 8, 0, 8000)});
  CHECK_FALSE(policy->assign_job(job, empty_grid).has_value());
}

TEST_CASE("the registry rejects unknown names and duplicates") {
  PlatformSpec dummy;
  bool unknown = false;
  try {
    default_policy_registry().make("no_such_policy", 0, dummy);
  } catch (const Error& e) {
    unknown = true;
    CHECK(e.code() == std::string("UnknownPolicy"));
  }
  CHECK(unknown);

  PolicyRegistry local;
  local.register_policy("mine", [](std::uint64_t, const PlatformSpec&) {
    return default_policy_registry().make("first_fit", 0, PlatformSpec{});
  });
  bool duplicate = false;
  try {
    local.register_policy("mine", [](std::uint64_t, const PlatformSpec&) {
      return default_policy_registry().make("first_fit", 0, PlatformSpec{});
    });
  } catch (const Error& e) {
    duplicate = true;
    CHECK(e.code() == std::string("DuplicatePolicyName"));
  }
  CHECK(duplicate);

  auto names = default_policy_registry().names();
  CHECK(names.size() >= 4);
}
