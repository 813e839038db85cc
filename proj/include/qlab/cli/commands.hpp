#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qlab::cli {

const std::vector<std::string>& command_names();

struct CommandOptions {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "qlab_out";
  std::string filter;
};

// Runs one command and returns its exit code: 0 pass, 1 check failure, 2 usage or config error.
int run_command(const CommandOptions& opt);

}  // namespace qlab::cli
