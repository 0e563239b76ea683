#pragma once

// Shared fixture builders for the test suites: tiny platforms, jobs, and a
// scratch directory that cleans up after itself.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridweave/platform.hpp"
#include "gridweave/workload.hpp"

namespace testsupport {

inline gridweave::SiteSpec make_site(const std::string& name, std::int64_t hosts,
                                     std::int64_t cores_per_host, double speed_per_core,
                                     double memory_per_host_mb, double bandwidth_bps,
                                     double latency_s, double overhead_s = 0.0) {
  gridweave::SiteSpec site;
  site.name = name;
  site.host_count = hosts;
  site.cores_per_host = cores_per_host;
  site.speed_per_core = speed_per_core;
  site.memory_per_host_mb = memory_per_host_mb;
  site.disk_capacity_gb = 1000.0;
  site.uplink_bandwidth_bps = bandwidth_bps;
  site.uplink_latency_s = latency_s;
  site.scheduling_overhead_s = overhead_s;
  return site;
}

inline gridweave::PlatformSpec make_platform(std::vector<gridweave::SiteSpec> sites,
                                             double broker_latency_s = 0.0) {
  gridweave::PlatformSpec platform;
  platform.sites = std::move(sites);
  platform.broker_latency_s = broker_latency_s;
  return platform;
}

inline gridweave::Job make_job(std::uint64_t id, double submit_s, double work,
                               std::int64_t cores = 1, double memory_mb = 0.0,
                               double input_bytes = 0.0, double output_bytes = 0.0,
                               std::string target_site = {}) {
  gridweave::Job job;
  job.id = id;
  job.submit_time_s = submit_s;
  job.work = work;
  job.cores = cores;
  job.memory_mb = memory_mb;
  job.input_bytes = input_bytes;
  job.output_bytes = output_bytes;
  job.target_site = std::move(target_site);
  return job;
}

// Scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    std::uniform_int_distribution<std::uint64_t> dist;
    for (int attempt = 0; attempt < 16; ++attempt) {
      std::ostringstream name;
      name << "gridweave_test_" << std::hex << dist(rd);
      auto candidate = std::filesystem::temp_directory_path() / name.str();
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create a scratch directory");
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("could not write " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("could not read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testsupport
