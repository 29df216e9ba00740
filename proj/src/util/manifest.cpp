#include "easeg/util/manifest.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>

#include "easeg/core/fs.hpp"

namespace easeg {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input_digest(const std::string& name,
                                   const std::filesystem::path& file) {
  input_digests[name] = digest_hex(digest_file(file));
}

void RunManifest::add_artifact_digest(const std::string& name,
                                      const std::filesystem::path& file) {
  artifacts[name] = digest_hex(digest_file(file));
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["toolkit_version"] = toolkit_version;
  j["config"] = config_snapshot;
  j["seed"] = seed;
  j["input_digests"] = input_digests;
  j["artifacts"] = artifacts;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace easeg
