#include "easeg/core/ini.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace easeg {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Ini Ini::parse(const std::string& text) {
  Ini ini;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    ini.values_[section.empty() ? key : section + "." + key] = value;
  }
  return ini;
}

Ini Ini::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Ini::get_string(const std::string& key,
                            const std::string& dflt) const {
  auto v = get(key);
  return v ? *v : dflt;
}

double Ini::get_double(const std::string& key, double dflt) const {
  auto v = get(key);
  if (!v) return dflt;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not a number: " + *v);
  }
}

int Ini::get_int(const std::string& key, int dflt) const {
  auto v = get(key);
  if (!v) return dflt;
  try {
    return std::stoi(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not an integer: " + *v);
  }
}

long long Ini::get_int64(const std::string& key, long long dflt) const {
  auto v = get(key);
  if (!v) return dflt;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not an integer: " + *v);
  }
}

bool Ini::get_bool(const std::string& key, bool dflt) const {
  auto v = get(key);
  if (!v) return dflt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw std::runtime_error("config key '" + key + "': not a boolean: " + *v);
}

std::vector<double> Ini::get_doubles(const std::string& key,
                                     const std::vector<double>& dflt) const {
  auto v = get(key);
  if (!v) return dflt;
  std::vector<double> out;
  for (const auto& tok : split_csv(*v)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key +
                               "': not a number list: " + *v);
    }
  }
  return out;
}

std::string Ini::require_string(const std::string& key) {
  auto v = get(key);
  if (!v) {
    missing_.push_back(key);
    return {};
  }
  return *v;
}

double Ini::require_double(const std::string& key) {
  auto v = get(key);
  if (!v) {
    missing_.push_back(key);
    return 0.0;
  }
  return std::stod(*v);
}

int Ini::require_int(const std::string& key) {
  auto v = get(key);
  if (!v) {
    missing_.push_back(key);
    return 0;
  }
  return std::stoi(*v);
}

void Ini::check_complete() const {
  if (missing_.empty()) return;
  std::string msg = "missing config keys:";
  for (const auto& k : missing_) msg += " " + k;
  throw std::runtime_error(msg);
}

std::string Ini::serialize() const {
  std::string cur_section;
  std::ostringstream out;
  bool first = true;
  for (const auto& [qkey, value] : values_) {
    auto dot = qkey.find('.');
    std::string section = dot == std::string::npos ? "" : qkey.substr(0, dot);
    std::string key = dot == std::string::npos ? qkey : qkey.substr(dot + 1);
    if (section != cur_section || first) {
      if (!first) out << "\n";
      if (!section.empty()) out << "[" << section << "]\n";
      cur_section = section;
      first = false;
    }
    out << key << " = " << value << "\n";
  }
  return out.str();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

}  // namespace easeg
