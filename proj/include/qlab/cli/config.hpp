#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlab::cli {

// Usage or configuration problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string doc;
};

// Flat `key = value` configuration with `#` comments. Every key has a documented default.
class ScenarioConfig {
 public:
  ScenarioConfig();
  static ScenarioConfig parse(std::istream& in, const std::string& source = "<config>");
  static ScenarioConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // non-negative integer
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;

  const std::vector<ConfigEntry>& entries() const { return entries_; }
  // Directory of the loaded file; relative paths in values resolve against it.
  const std::filesystem::path& base_dir() const { return base_; }

 private:
  const ConfigEntry& find(const std::string& key) const;
  std::vector<ConfigEntry> entries_;
  std::filesystem::path base_;
};

}  // namespace qlab::cli
