#include "gridweave/platform.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace gridweave {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("MissingFile", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("SchemaViolation", path + ": " + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw config_error("SchemaViolation", where + ": missing field '" + key + "'");
  return *it;
}

double require_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number())
    throw config_error("SchemaViolation", where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t require_integer(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer())
    throw config_error("SchemaViolation", where + ": field '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string())
    throw config_error("SchemaViolation", where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

void warn_unknown_fields(const json& obj, const std::set<std::string>& known,
                         const std::string& where, std::vector<std::string>& warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      warnings.push_back(where + ": unknown field '" + it.key() + "' ignored");
  }
}

void check_positive(double v, const char* what, const std::string& where) {
  if (!(v > 0.0))
    throw config_error("NonPositiveResource", where + ": " + what + " must be positive");
}

void check_non_negative(double v, const char* what, const std::string& where) {
  if (!(v >= 0.0))
    throw config_error("NonPositiveResource", where + ": " + what + " must be non-negative");
}

}  // namespace

const SiteSpec* PlatformSpec::find_site(const std::string& name) const {
  for (const auto& s : sites)
    if (s.name == name) return &s;
  return nullptr;
}

std::string to_string(SnapshotMode mode) {
  return mode == SnapshotMode::Periodic ? "periodic" : "on_transition";
}

LoadedPlatform load_platform_from_json(const json& infrastructure, const json& network) {
  LoadedPlatform out;

  if (!infrastructure.is_object())
    throw config_error("SchemaViolation", "infrastructure: top level must be an object");
  std::int64_t version = require_integer(infrastructure, "schema_version", "infrastructure");
  if (version != 1)
    throw config_error("SchemaViolation",
                       "infrastructure: unsupported schema_version " + std::to_string(version));
  out.platform.schema_version = 1;
  warn_unknown_fields(infrastructure, {"schema_version", "sites"}, "infrastructure",
                      out.warnings);

  const json& sites = require(infrastructure, "sites", "infrastructure");
  if (!sites.is_array())
    throw config_error("SchemaViolation", "infrastructure: 'sites' must be an array");

  std::unordered_set<std::string> seen;
  for (const json& entry : sites) {
    if (!entry.is_object())
      throw config_error("SchemaViolation", "infrastructure: site entries must be objects");
    SiteSpec site;
    site.name = require_string(entry, "name", "infrastructure site");
    const std::string where = "site '" + site.name + "'";
    if (!seen.insert(site.name).second)
      throw config_error("DuplicateSiteName", "duplicate site name '" + site.name + "'");

    site.host_count = require_integer(entry, "host_count", where);
    site.cores_per_host = require_integer(entry, "cores_per_host", where);
    site.speed_per_core = require_number(entry, "speed_per_core", where);
    site.memory_per_host_mb = require_number(entry, "memory_per_host_mb", where);
    site.disk_capacity_gb = require_number(entry, "disk_capacity_gb", where);
    if (entry.contains("scheduling_overhead_s")) {
      const json& v = entry["scheduling_overhead_s"];
      if (!v.is_number())
        throw config_error("SchemaViolation",
                           where + ": field 'scheduling_overhead_s' must be a number");
      site.scheduling_overhead_s = v.get<double>();
    }
    warn_unknown_fields(entry,
                        {"name", "host_count", "cores_per_host", "speed_per_core",
                         "memory_per_host_mb", "disk_capacity_gb", "scheduling_overhead_s"},
                        where, out.warnings);

    if (site.host_count < 1)
      throw config_error("NonPositiveResource", where + ": host_count must be >= 1");
    if (site.cores_per_host < 1)
      throw config_error("NonPositiveResource", where + ": cores_per_host must be >= 1");
    check_positive(site.speed_per_core, "speed_per_core", where);
    check_non_negative(site.memory_per_host_mb, "memory_per_host_mb", where);
    check_non_negative(site.disk_capacity_gb, "disk_capacity_gb", where);
    check_non_negative(site.scheduling_overhead_s, "scheduling_overhead_s", where);

    out.platform.sites.push_back(std::move(site));
  }

  if (!network.is_object())
    throw config_error("SchemaViolation", "network: top level must be an object");
  warn_unknown_fields(network, {"links", "broker_latency_s"}, "network", out.warnings);
  const json& links = require(network, "links", "network");
  if (!links.is_object())
    throw config_error("SchemaViolation", "network: 'links' must be an object");

  if (network.contains("broker_latency_s")) {
    const json& v = network["broker_latency_s"];
    if (!v.is_number())
      throw config_error("SchemaViolation", "network: 'broker_latency_s' must be a number");
    out.platform.broker_latency_s = v.get<double>();
    check_non_negative(out.platform.broker_latency_s, "broker_latency_s", "network");
  }

  for (auto it = links.begin(); it != links.end(); ++it) {
    const std::string& name = it.key();
    if (!seen.count(name))
      throw config_error("UnknownSiteInNetworkFile",
                         "network file names unknown site '" + name + "'");
    const json& link = it.value();
    if (!link.is_object())
      throw config_error("SchemaViolation", "network link '" + name + "' must be an object");
    const std::string where = "link '" + name + "'";
    double bandwidth = require_number(link, "bandwidth_bps", where);
    double latency = require_number(link, "latency_s", where);
    warn_unknown_fields(link, {"bandwidth_bps", "latency_s"}, where, out.warnings);
    check_positive(bandwidth, "bandwidth_bps", where);
    check_non_negative(latency, "latency_s", where);
    for (auto& site : out.platform.sites) {
      if (site.name == name) {
        site.uplink_bandwidth_bps = bandwidth;
        site.uplink_latency_s = latency;
      }
    }
  }

  for (const auto& site : out.platform.sites) {
    if (!links.contains(site.name))
      throw config_error("UnknownSiteInNetworkFile",
                         "site '" + site.name + "' has no entry in the network file");
  }

  return out;
}

LoadedPlatform load_platform(const std::string& infrastructure_path,
                             const std::string& network_path) {
  return load_platform_from_json(parse_file(infrastructure_path), parse_file(network_path));
}

LoadedExecutionParams load_execution_params_from_json(const json& doc) {
  LoadedExecutionParams out;
  if (!doc.is_object())
    throw config_error("SchemaViolation", "execution: top level must be an object");
  warn_unknown_fields(doc,
                      {"policy", "seed", "snapshot_mode", "snapshot_interval_s", "output_dir",
                       "stop_time_s"},
                      "execution", out.warnings);

  out.params.policy = require_string(doc, "policy", "execution");
  if (out.params.policy.empty())
    throw config_error("SchemaViolation", "execution: 'policy' must be non-empty");

  if (doc.contains("seed")) {
    const json& v = doc["seed"];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw config_error("SchemaViolation", "execution: 'seed' must be a non-negative integer");
    out.params.seed = v.get<std::uint64_t>();
  } else {
    out.params.seed = 0;
    out.warnings.push_back("execution: 'seed' omitted, defaulting to 0");
  }

  if (doc.contains("snapshot_mode")) {
    std::string mode = require_string(doc, "snapshot_mode", "execution");
    if (mode == "on_transition") {
      out.params.snapshot_mode = SnapshotMode::OnTransition;
    } else if (mode == "periodic") {
      out.params.snapshot_mode = SnapshotMode::Periodic;
    } else {
      throw config_error("SchemaViolation", "execution: unknown snapshot_mode '" + mode + "'");
    }
  }

  if (doc.contains("snapshot_interval_s")) {
    const json& v = doc["snapshot_interval_s"];
    if (!v.is_number())
      throw config_error("SchemaViolation", "execution: 'snapshot_interval_s' must be a number");
    out.params.snapshot_interval_s = v.get<double>();
  }
  if (out.params.snapshot_mode == SnapshotMode::Periodic &&
      !(out.params.snapshot_interval_s > 0.0))
    throw config_error("SchemaViolation",
                       "execution: periodic snapshots require snapshot_interval_s > 0");

  if (doc.contains("output_dir")) out.params.output_dir = require_string(doc, "output_dir", "execution");

  if (doc.contains("stop_time_s")) {
    const json& v = doc["stop_time_s"];
    if (!v.is_number() || !(v.get<double>() >= 0.0))
      throw config_error("SchemaViolation", "execution: 'stop_time_s' must be a number >= 0");
    out.params.stop_time_s = v.get<double>();
  }

  return out;
}

LoadedExecutionParams load_execution_params(const std::string& path) {
  return load_execution_params_from_json(parse_file(path));
}

json dump_infrastructure_json(const PlatformSpec& platform) {
  json sites = json::array();
  for (const auto& s : platform.sites) {
    json entry = {
        {"name", s.name},
        {"host_count", s.host_count},
        {"cores_per_host", s.cores_per_host},
        {"speed_per_core", s.speed_per_core},
        {"memory_per_host_mb", s.memory_per_host_mb},
        {"disk_capacity_gb", s.disk_capacity_gb},
    };
    if (s.scheduling_overhead_s != 0.0) entry["scheduling_overhead_s"] = s.scheduling_overhead_s;
    sites.push_back(std::move(entry));
  }
  return json{{"schema_version", platform.schema_version}, {"sites", std::move(sites)}};
}

json dump_network_json(const PlatformSpec& platform) {
  json links = json::object();
  for (const auto& s : platform.sites) {
    links[s.name] = {{"bandwidth_bps", s.uplink_bandwidth_bps},
                     {"latency_s", s.uplink_latency_s}};
  }
  return json{{"links", std::move(links)}, {"broker_latency_s", platform.broker_latency_s}};
}

}  // namespace gridweave
