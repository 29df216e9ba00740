#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "easeg/nn/tensor.hpp"

namespace easeg::nn {

// Versioned binary checkpoint container: magic + version, a JSON manifest
// (architecture id, seed, epoch/round, free-form metadata, tensor shapes),
// then the raw little-endian float32 tensor payload in manifest order.
struct Checkpoint {
  std::string architecture_id;
  std::uint64_t seed = 0;
  long epoch = 0;
  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix<float>> tensors;

  static constexpr std::uint32_t kVersion = 1;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  std::string meta_or(const std::string& key, const std::string& dflt) const {
    auto it = meta.find(key);
    return it == meta.end() ? dflt : it->second;
  }
};

}  // namespace easeg::nn
