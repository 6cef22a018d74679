#include "skewfbm/mc/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace skewfbm::mc {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["code_version"] = kCodeVersion;
  j["command"] = command;
  j["config"] = config;
  j["master_seed"] = master_seed;
  j["workers"] = workers;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["outputs"] = outputs;
  j["summary"] = summary;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kManifestSchemaVersion)
    throw std::runtime_error("unsupported manifest schema version");
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.workers = j.value("workers", 1u);
  m.started_utc = j.value("started_utc", "");
  m.finished_utc = j.value("finished_utc", "");
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.summary = j.value("summary", nlohmann::json::object());
  return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << to_json().dump(2) << '\n';
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest " + path.string());
  return from_json(nlohmann::json::parse(f));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace skewfbm::mc
