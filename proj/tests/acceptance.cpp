// Runs `qlab verify` twice as a subprocess and prints one PASS/FAIL line per acceptance criterion.
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int exit_code = -1;
  double seconds = 0.0;
};

Run run_verify(const fs::path& out, const fs::path& log) {
  const std::string cmd = std::string("\"") + QLAB_EXE + "\" verify --out \"" + out.string() + "\" > \"" +
                          log.string() + "\" 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  Run r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("qlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const Run first = run_verify(root / "run1", root / "run1.log");
  const Run second = run_verify(root / "run2", root / "run2.log");

  json report;
  try {
    report = json::parse(slurp(root / "run1" / "verify_report.json"));
  } catch (const std::exception& e) {
    std::printf("could not read verify report: %s\n%s", e.what(), slurp(root / "run1.log").c_str());
    return 1;
  }
  const bool manifests_equal = slurp(root / "run1" / "manifest.json") == slurp(root / "run2" / "manifest.json") &&
                               slurp(root / "run1" / "verify_report.json") ==
                                   slurp(root / "run2" / "verify_report.json");

  int failed = 0, seen = 0;
  for (const json& r : report) {
    const std::string id = r["id"].get<std::string>();
    bool ok = r["passed"].get<bool>();
    std::string note;
    if (id == "c17") {
      const double budget = r.value("tolerance", 180.0);
      ok = ok && manifests_equal && first.seconds < budget;
      note = " (subprocess " + std::to_string(first.seconds) + " s, manifests " +
             (manifests_equal ? "identical" : "differ") + ")";
    }
    std::printf("%s %-26s %s%s\n", id.c_str(), r["name"].get<std::string>().c_str(), ok ? "PASS" : "FAIL",
                note.c_str());
    if (!ok) {
      ++failed;
      for (const json& c : r["conditions"])
        if (!c["passed"].get<bool>()) std::printf("    %s\n", c.dump().c_str());
      if (r.contains("error")) std::printf("    error: %s\n", r["error"].get<std::string>().c_str());
    }
    ++seen;
  }
  if (seen != 17) {
    std::printf("expected 17 criteria, report has %d\n", seen);
    ++failed;
  }
  if (first.exit_code != (failed ? 1 : 0)) std::printf("note: verify exited with %d\n", first.exit_code);
  std::printf("%d/%d criteria passed\n", seen - failed, seen);
  if (failed == 0) fs::remove_all(root);
  return failed == 0 ? 0 : 1;
}
