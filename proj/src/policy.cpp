#include "gridweave/policy.hpp"

#include "gridweave/errors.hpp"

namespace gridweave {

namespace {

bool feasible_now(const SiteView& site, const Job& job) {
  return site.free_cores >= job.cores && site.free_memory_mb >= job.memory_mb;
}

class FirstFitPolicy final : public AllocationPolicy {
public:
  std::optional<std::string> assign_job(const Job& job, const ResourceView& view) override {
    for (const auto& site : view.sites)
      if (feasible_now(site, job)) return site.name;
    return std::nullopt;
  }
};

class LeastLoadedPolicy final : public AllocationPolicy {
public:
  std::optional<std::string> assign_job(const Job& job, const ResourceView& view) override {
    const SiteView* best = nullptr;
    double best_ratio = -1.0;
    for (const auto& site : view.sites) {
      if (!feasible_now(site, job)) continue;
      double ratio =
          static_cast<double>(site.free_cores) / static_cast<double>(site.total_cores);
      if (ratio > best_ratio) {  // view is name-sorted, so '>' keeps the lexicographic tie
        best_ratio = ratio;
        best = &site;
      }
    }
    if (!best) return std::nullopt;
    return best->name;
  }
};

class ReplayPolicy final : public AllocationPolicy {
public:
  std::optional<std::string> assign_job(const Job& job, const ResourceView&) override {
    if (job.target_site.empty())
      throw workload_error("MissingTargetSite",
                           "job " + std::to_string(job.id) + " has no target_site to replay");
    return job.target_site;
  }
};

class RoundRobinPolicy final : public AllocationPolicy {
public:
  explicit RoundRobinPolicy(std::uint64_t seed) : seed_(seed) {}

  void get_resource_information(const ResourceView& view) override {
    if (!started_ && !view.sites.empty()) {
      cursor_ = seed_ % view.sites.size();
      started_ = true;
    }
  }

  std::optional<std::string> assign_job(const Job& job, const ResourceView& view) override {
    if (view.sites.empty()) return std::nullopt;
    if (!started_) {
      cursor_ = seed_ % view.sites.size();
      started_ = true;
    }
    const std::size_t n = view.sites.size();
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t i = (cursor_ + step) % n;
      if (feasible_now(view.sites[i], job)) {
        cursor_ = (i + 1) % n;  // fairness advances past the chosen site only
        return view.sites[i].name;
      }
    }
    return std::nullopt;
  }

private:
  std::uint64_t seed_;
  std::size_t cursor_ = 0;
  bool started_ = false;
};

}  // namespace

void PolicyRegistry::register_policy(const std::string& name, PolicyFactory factory) {
  if (factories_.count(name))
    throw config_error("DuplicatePolicyName", "policy '" + name + "' already registered");
  factories_[name] = std::move(factory);
}

std::unique_ptr<AllocationPolicy> PolicyRegistry::make(const std::string& name,
                                                       std::uint64_t seed,
                                                       const PlatformSpec& platform) const {
  auto it = factories_.find(name);
  if (it == factories_.end())
    throw config_error("UnknownPolicy", "no policy named '" + name + "'");
  return it->second(seed, platform);
}

std::vector<std::string> PolicyRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

const PolicyRegistry& default_policy_registry() {
  static const PolicyRegistry registry = [] {
    PolicyRegistry r;
    r.register_policy("first_fit", [](std::uint64_t, const PlatformSpec&) {
      return std::make_unique<FirstFitPolicy>();
    });
    r.register_policy("least_loaded", [](std::uint64_t, const PlatformSpec&) {
      return std::make_unique<LeastLoadedPolicy>();
    });
    r.register_policy("replay", [](std::uint64_t, const PlatformSpec&) {
      return std::make_unique<ReplayPolicy>();
    });
    r.register_policy("round_robin", [](std::uint64_t seed, const PlatformSpec&) {
      return std::make_unique<RoundRobinPolicy>(seed);
    });
    return r;
  }();
  return registry;
}

}  // namespace gridweave
