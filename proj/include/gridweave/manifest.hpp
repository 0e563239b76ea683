#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace gridweave {

/// Reproducibility envelope written next to every command's outputs: resolved
/// input paths with content hashes, the seed and policy, and the produced
/// files.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, content hash
  std::uint64_t seed = 0;
  std::string policy;
  std::string code_version;
  double wall_runtime_s = 0.0;
  std::vector<std::string> outputs;
  bool truncated = false;
  std::vector<std::string> warnings;
  nlohmann::json extra;  // command-specific details (optimizer, bounds, ...)
};

/// FNV-1a 64-bit content hash, rendered as 16 hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);  // throws MissingFile

std::string manifest_to_json(const RunManifest& manifest);

/// Serialize and write atomically (temp file + rename in the target
/// directory).
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace gridweave
