#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qlab::cli {

// One measured quantity compared against a limit.
struct Condition {
  std::string label;
  double value = 0.0;
  double limit = 0.0;
  bool below = true;  // pass when value < limit, otherwise when value > limit
  bool passed() const { return below ? value < limit : value > limit; }
};

struct CheckResult {
  std::string id;
  std::string name;
  double tolerance = 0.0;
  double budget_s = 0.0;  // wall time limit, 0 for none
  std::vector<Condition> conditions;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  std::string error;      // non-empty when the check threw
  double seconds = 0.0;   // wall time, kept out of the deterministic report
  bool within_budget() const { return budget_s <= 0.0 || seconds <= budget_s; }
  bool passed() const;
  nlohmann::ordered_json to_json() const;  // without wall time
};

struct CheckContext {
  unsigned threads = 1;
  std::string filter;
  const std::vector<CheckResult>* previous = nullptr;  // earlier results of the same run
};

struct CheckSpec {
  std::string id;    // c01 .. c17
  std::string name;
  double tolerance;  // default primary tolerance, overridable by QLAB_TOL_<ID>
  double budget_s;
  std::function<void(CheckResult&, double tol, const CheckContext&)> run;
};

const std::vector<CheckSpec>& check_registry();

// Tolerance for a check after applying the environment override.
double effective_tolerance(const CheckSpec& spec);

bool matches_filter(const CheckSpec& spec, const std::string& filter);

CheckResult run_check(const CheckSpec& spec, const CheckContext& ctx);

// Runs every check whose id or name contains the filter (all when empty).
std::vector<CheckResult> run_checks(const std::string& filter, const CheckContext& ctx);

}  // namespace qlab::cli
