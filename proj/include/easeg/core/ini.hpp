#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace easeg {

// Flat structured-text config: "[section]" headers, "key = value" lines,
// '#' comments. Section-qualified keys are "section.key". Lookups are
// recorded so a run manifest can embed the effective configuration, and
// missing required keys are accumulated and reported in one pass.
class Ini {
 public:
  Ini() = default;

  static Ini parse(const std::string& text);
  static Ini load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  long long get_int64(const std::string& key, long long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& dflt) const;

  // Required variants: a miss is recorded, not thrown, so callers can
  // enumerate every missing key before failing.
  std::string require_string(const std::string& key);
  double require_double(const std::string& key);
  int require_int(const std::string& key);

  const std::vector<std::string>& missing() const { return missing_; }
  void check_complete() const;

  // Round-trippable dump (sorted by section-qualified key).
  std::string serialize() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> missing_;
};

std::vector<std::string> split_csv(const std::string& s);

}  // namespace easeg
