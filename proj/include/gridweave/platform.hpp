#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridweave/errors.hpp"

namespace gridweave {

/// One computing site: a homogeneous pool of hosts behind a single uplink to
/// the broker.
struct SiteSpec {
  std::string name;
  std::int64_t host_count = 0;
  std::int64_t cores_per_host = 0;
  double speed_per_core = 0.0;  // operations per second per core
  double memory_per_host_mb = 0.0;
  double disk_capacity_gb = 0.0;
  double uplink_bandwidth_bps = 0.0;
  double uplink_latency_s = 0.0;
  double scheduling_overhead_s = 0.0;  // per-job delay between staging and reservation

  std::int64_t total_cores() const { return host_count * cores_per_host; }
  double total_memory_mb() const { return static_cast<double>(host_count) * memory_per_host_mb; }
};

/// Star topology centred on the broker. Site order is file order; consumers
/// that need a canonical order sort by name themselves.
struct PlatformSpec {
  int schema_version = 1;
  std::vector<SiteSpec> sites;
  double broker_latency_s = 0.0;  // loaded and round-tripped; reserved, the engine does not consume it

  const SiteSpec* find_site(const std::string& name) const;
};

enum class SnapshotMode { OnTransition, Periodic };

std::string to_string(SnapshotMode mode);

struct ExecutionParams {
  std::string policy;
  std::uint64_t seed = 0;
  SnapshotMode snapshot_mode = SnapshotMode::OnTransition;
  double snapshot_interval_s = 0.0;  // required > 0 only for periodic mode
  std::string output_dir = "gridweave_out";
  std::optional<double> stop_time_s;
};

struct LoadedPlatform {
  PlatformSpec platform;
  std::vector<std::string> warnings;  // unknown-field notices and similar
};

struct LoadedExecutionParams {
  ExecutionParams params;
  std::vector<std::string> warnings;
};

/// Parse and cross-validate the infrastructure and network descriptions.
/// Throws Error with code MissingFile, SchemaViolation, DuplicateSiteName,
/// NonPositiveResource, or UnknownSiteInNetworkFile.
LoadedPlatform load_platform(const std::string& infrastructure_path,
                             const std::string& network_path);
LoadedPlatform load_platform_from_json(const nlohmann::json& infrastructure,
                                       const nlohmann::json& network);

LoadedExecutionParams load_execution_params(const std::string& path);
LoadedExecutionParams load_execution_params_from_json(const nlohmann::json& doc);

/// Inverse of load_platform: regenerate the two description files. Loading the
/// dump yields a field-for-field identical PlatformSpec.
nlohmann::json dump_infrastructure_json(const PlatformSpec& platform);
nlohmann::json dump_network_json(const PlatformSpec& platform);

}  // namespace gridweave
