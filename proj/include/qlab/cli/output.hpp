#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qlab/cli/config.hpp"

namespace qlab::cli {

inline constexpr const char* kVersion = "0.1.0";

using Cell = std::variant<double, std::string>;

// Writes `text` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& text);

std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<Cell>>& rows);

// Output directory of one command run. Files are written atomically; the manifest comes last.
class RunOutput {
 public:
  RunOutput(std::filesystem::path dir, std::string command);

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<Cell>>& rows);
  void json(const std::string& name, const nlohmann::ordered_json& value);
  void text(const std::string& name, const std::string& content);

  // Records a pass/fail entry in the manifest.
  void check(const std::string& name, bool passed, double value, double limit);
  bool all_passed() const;

  nlohmann::ordered_json& results() { return results_; }

  // manifest.json (deterministic) and timing.json (wall time).
  void finish(const ScenarioConfig& cfg, const std::string& status, double wall_seconds,
              const nlohmann::ordered_json& timing_extra = nlohmann::ordered_json::object());

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::vector<std::string> outputs_;
  nlohmann::ordered_json checks_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json results_ = nlohmann::ordered_json::object();
};

}  // namespace qlab::cli
