#include "qlab/cli/output.hpp"

#include <algorithm>
#include <fstream>

#include "qlab/error.hpp"
#include "qlab/format.hpp"

namespace qlab::cli {

using ojson = nlohmann::ordered_json;

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(Errc::invalid_argument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<Cell>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) s += ',';
    s += header[i];
  }
  s += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      if (const double* d = std::get_if<double>(&row[i]))
        s += shortest(*d);
      else
        s += std::get<std::string>(row[i]);
    }
    s += '\n';
  }
  return s;
}

RunOutput::RunOutput(std::filesystem::path dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string());
}

void RunOutput::csv(const std::string& name, const std::vector<std::string>& header,
                    const std::vector<std::vector<Cell>>& rows) {
  write_atomic(dir_ / name, format_csv(header, rows));
  outputs_.push_back(name);
}

void RunOutput::json(const std::string& name, const ojson& value) {
  write_atomic(dir_ / name, value.dump(2) + "\n");
  outputs_.push_back(name);
}

void RunOutput::text(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  outputs_.push_back(name);
}

void RunOutput::check(const std::string& name, bool passed, double value, double limit) {
  checks_.push_back({{"name", name}, {"passed", passed}, {"value", value}, {"limit", limit}});
}

bool RunOutput::all_passed() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const ojson& c) { return c["passed"].get<bool>(); });
}

void RunOutput::finish(const ScenarioConfig& cfg, const std::string& status, double wall_seconds,
                       const ojson& timing_extra) {
  ojson m;
  m["command"] = command_;
  m["version"] = kVersion;
  ojson conf = ojson::object();
  for (const ConfigEntry& e : cfg.entries()) conf[e.key] = e.value;
  m["config"] = conf;
  m["seed"] = cfg.integer("seed");
  std::vector<std::string> files = outputs_;
  std::sort(files.begin(), files.end());
  files.push_back("timing.json");
  m["outputs"] = files;
  m["checks"] = checks_;
  m["status"] = status;
  m["results"] = results_;

  ojson t;
  t["command"] = command_;
  t["wall_seconds"] = wall_seconds;
  for (auto it = timing_extra.begin(); it != timing_extra.end(); ++it) t[it.key()] = it.value();
  write_atomic(dir_ / "timing.json", t.dump(2) + "\n");
  write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace qlab::cli
