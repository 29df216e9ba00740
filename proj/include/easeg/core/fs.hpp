#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace easeg {

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<char> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const void* data,
                 std::size_t size);

// Sorted immediate subdirectory names. std::filesystem iteration order is
// unspecified; everything downstream depends on a stable case order.
std::vector<std::string> list_subdirs(const std::filesystem::path& dir);
std::vector<std::string> list_files(const std::filesystem::path& dir,
                                    const std::string& extension = "");

// FNV-1a 64 over file bytes; used for dataset/checkpoint identity in run
// manifests, not for security.
std::uint64_t digest_file(const std::filesystem::path& path);
std::uint64_t digest_bytes(const void* data, std::size_t size);
std::string digest_hex(std::uint64_t digest);

// Exclusive lock file: created at run start, removed on destruction.
// A pre-existing lock means another run targets the same directory.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path lock_path_;
  bool held_ = false;
};

}  // namespace easeg
