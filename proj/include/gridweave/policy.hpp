#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridweave/platform.hpp"
#include "gridweave/workload.hpp"

namespace gridweave {

/// Immutable per-decision snapshot of grid state, sites in lexicographic name
/// order. Assignment does not reserve cores, so free_cores reflects compute
/// occupancy only; queued jobs show up in local_queue_length.
struct SiteView {
  std::string name;
  std::int64_t total_cores = 0;
  std::int64_t free_cores = 0;
  double free_memory_mb = 0.0;
  double speed_per_core = 0.0;
  double uplink_bandwidth_bps = 0.0;
  std::int64_t local_queue_length = 0;
};

struct ResourceView {
  std::vector<SiteView> sites;
  std::int64_t pending_global = 0;
};

/// Pluggable allocation-policy surface: one decision per job, no batching, and
/// no resource side effects (only the receiver reserves).
class AllocationPolicy {
public:
  virtual ~AllocationPolicy() = default;

  /// Topology handshake, invoked before each decision batch (an arrival or one
  /// pending-list pass). Default keeps nothing.
  virtual void get_resource_information(const ResourceView& view) { (void)view; }

  /// Return a site name to queue the job at, or nullopt to decline (the job
  /// then waits in the broker's pending list).
  virtual std::optional<std::string> assign_job(const Job& job, const ResourceView& view) = 0;

  virtual void on_job_finished(const Job& job, const std::string& site) {
    (void)job;
    (void)site;
  }
};

using PolicyFactory =
    std::function<std::unique_ptr<AllocationPolicy>(std::uint64_t seed, const PlatformSpec&)>;

class PolicyRegistry {
public:
  /// Throws DuplicatePolicyName when the name is taken.
  void register_policy(const std::string& name, PolicyFactory factory);
  /// Throws UnknownPolicy.
  std::unique_ptr<AllocationPolicy> make(const std::string& name, std::uint64_t seed,
                                         const PlatformSpec& platform) const;
  bool contains(const std::string& name) const { return factories_.count(name) != 0; }
  std::vector<std::string> names() const;

private:
  std::map<std::string, PolicyFactory> factories_;
};

/// Registry with the built-ins: first_fit, least_loaded, replay, round_robin.
const PolicyRegistry& default_policy_registry();

}  // namespace gridweave
