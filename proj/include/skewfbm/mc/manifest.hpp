#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace skewfbm::mc {

inline constexpr const char* kCodeVersion = "0.3.0";
inline constexpr int kManifestSchemaVersion = 1;

/// Everything needed to regenerate a study's tables. The `reproducible`
/// block (command, config, seed) fully determines every output table in
/// single-worker mode; timestamps and worker count are informational.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

std::string utc_timestamp();

}  // namespace skewfbm::mc
