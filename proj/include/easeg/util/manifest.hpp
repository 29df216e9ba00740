#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace easeg {

inline constexpr const char* kToolkitVersion = "0.1.0";

// One manifest per produced run directory: the effective configuration,
// seeds, input digests and produced artifact ids, so any report or
// checkpoint can be traced to exactly one invocation.
struct RunManifest {
  std::string subcommand;
  std::string toolkit_version = kToolkitVersion;
  std::string config_snapshot;  // serialized effective config
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> artifacts;  // name -> digest or path
  std::string started_at;
  std::string finished_at;

  void add_input_digest(const std::string& name,
                        const std::filesystem::path& file);
  void add_artifact_digest(const std::string& name,
                           const std::filesystem::path& file);
  void write(const std::filesystem::path& path) const;
};

std::string iso_timestamp();

}  // namespace easeg
