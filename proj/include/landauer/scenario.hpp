// scenario.hpp — scenario-file front end: parse a structured description of a
// process (system, reservoir, process kind, checks) and produce a verified
// report. Field names are fixed; unknown fields are rejected.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace landauer {

// Parse/validation failures; the CLI maps these to exit code 2.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckOutcome {
  std::string label;
  double observed;
  double tol;
  bool applicable;  // e.g. the heat-extraction margin only applies when beta*dQ <= 0
  bool passed;      // true when inapplicable
};

struct ScenarioResult {
  std::vector<std::pair<std::string, double>> values;  // report fields, in order
  std::vector<CheckOutcome> checks;
  bool all_passed;
};

ScenarioResult run_scenario_file(const std::string& path);
ScenarioResult run_scenario_text(const std::string& json_text, const std::string& base_dir);

// Human-readable report: every field, then one PASS/FAIL line per check.
std::string format_scenario_result(const ScenarioResult& result);

}  // namespace landauer
