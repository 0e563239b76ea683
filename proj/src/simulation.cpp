#include "gridweave/simulation.hpp"

#include <memory>

#include "gridweave/broker.hpp"
#include "gridweave/errors.hpp"

namespace gridweave {

SimulationResult run_simulation(const PlatformSpec& platform, const std::vector<Job>& jobs,
                                const SimulationOptions& options, const PolicyRegistry& registry,
                                const EventProbe& probe) {
  if (options.snapshot_mode == SnapshotMode::Periodic && options.snapshot_interval_s <= 0.0)
    throw config_error("InvalidSnapshotInterval",
                       "periodic snapshots need snapshot_interval_s > 0");
  if (options.stop_time_s && *options.stop_time_s < 0.0)
    throw config_error("InvalidStopTime", "stop_time_s must be >= 0");

  Engine engine(platform);
  TelemetryLog log;

  std::unique_ptr<AllocationPolicy> owned;
  AllocationPolicy* policy = options.policy_override;
  if (policy == nullptr) {
    owned = registry.make(options.policy, options.seed, platform);
    policy = owned.get();
  }

  Broker broker(engine, platform, jobs, *policy, log, options);
  broker.prepare();

  std::function<void()> kernel_probe;
  if (probe) {
    kernel_probe = [&engine, &broker, &probe]() {
      ProbeView view;
      view.engine = &engine;
      view.job_states = &broker.job_states();
      view.pending_list_size = broker.pending_list_size();
      probe(view);
    };
  }

  const Engine::RunStats stats = engine.run(broker, options.stop_time_s, kernel_probe);

  SimulationResult result;
  result.final_time_s = stats.final_time_s;
  result.truncated = stats.truncated;
  if (!result.truncated) broker.check_all_terminal();
  broker.finalize(result);
  result.events = log.records();
  return result;
}

}  // namespace gridweave
