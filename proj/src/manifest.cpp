#include "gridweave/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gridweave/errors.hpp"

namespace gridweave {

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("MissingFile", "cannot read '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64_hex(bytes);
}

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, hash] : manifest.inputs)
    j["inputs"].push_back({{"path", path}, {"fnv1a64", hash}});
  j["seed"] = manifest.seed;
  j["policy"] = manifest.policy;
  j["code_version"] = manifest.code_version;
  j["wall_runtime_s"] = manifest.wall_runtime_s;
  j["outputs"] = manifest.outputs;
  j["truncated"] = manifest.truncated;
  j["warnings"] = manifest.warnings;
  if (!manifest.extra.is_null()) j["extra"] = manifest.extra;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  namespace fs = std::filesystem;
  const std::string body = manifest_to_json(manifest);
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("IoError", "cannot write '" + tmp.string() + "'");
    out << body;
    if (!out.flush()) throw io_error("IoError", "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw io_error("IoError", "cannot move manifest into place at '" + path + "'");
}

}  // namespace gridweave
