#include "easeg/nn/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

#include "easeg/core/fs.hpp"

namespace easeg::nn {

namespace {
constexpr char kMagic[8] = {'E', 'A', 'S', 'G', 'C', 'K', 'P', 'T'};
}

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["architecture_id"] = architecture_id;
  header["seed"] = seed;
  header["epoch"] = epoch;
  header["meta"] = meta;
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& [name, m] : tensors)
    manifest.push_back({{"name", name},
                        {"rows", m.rows()},
                        {"cols", m.cols()}});
  header["tensors"] = manifest;
  const std::string header_str = header.dump();

  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write checkpoint: " + path.string());
  out.write(kMagic, 8);
  std::uint32_t version = kVersion;
  std::uint64_t header_len = header_str.size();
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(header_str.data(), static_cast<std::streamsize>(header_len));
  for (const auto& [name, m] : tensors)
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(float) * m.size()));
  if (!out) throw std::runtime_error("short checkpoint write: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&header_len, bytes.data() + 12, 8);
  if (version != kVersion)
    throw std::runtime_error(
        "checkpoint version " + std::to_string(version) + " unsupported (" +
        path.string() + "); current version is " + std::to_string(kVersion) +
        ": re-create the checkpoint with this toolkit version");
  if (bytes.size() < 20 + header_len)
    throw std::runtime_error("truncated checkpoint header: " + path.string());
  auto header = nlohmann::json::parse(
      std::string(bytes.data() + 20, bytes.data() + 20 + header_len));

  Checkpoint ckpt;
  ckpt.architecture_id = header.value("architecture_id", "");
  ckpt.seed = header.value("seed", std::uint64_t{0});
  ckpt.epoch = header.value("epoch", 0L);
  if (header.contains("meta"))
    ckpt.meta = header["meta"].get<std::map<std::string, std::string>>();

  std::size_t offset = 20 + header_len;
  for (const auto& entry : header["tensors"]) {
    std::string name = entry["name"];
    auto rows = entry["rows"].get<Eigen::Index>();
    auto cols = entry["cols"].get<Eigen::Index>();
    std::size_t nbytes = sizeof(float) * static_cast<std::size_t>(rows * cols);
    if (bytes.size() < offset + nbytes)
      throw std::runtime_error("truncated checkpoint payload: " +
                               path.string());
    Matrix<float> m(rows, cols);
    std::memcpy(m.data(), bytes.data() + offset, nbytes);
    ckpt.tensors.emplace(std::move(name), std::move(m));
    offset += nbytes;
  }
  return ckpt;
}

}  // namespace easeg::nn
