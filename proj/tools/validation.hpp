#pragma once

// Invariant suites shared by the `validate` subcommand and the acceptance
// runner. Each check is deterministic (fixed seeds) and reports its worst
// measured residual against a fixed threshold and a wall-clock limit.

#include <functional>
#include <string>
#include <vector>

#include "circlecs/io.hpp"

namespace circlecs::validation {

struct CheckResult {
  int id = 0;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool within_threshold = false;
  double seconds = 0.0;
  double time_limit = 0.0;
  json diagnostics = json::object();

  bool passed() const { return within_threshold && seconds < time_limit; }
};

struct Check {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<CheckResult()> run;
};

const std::vector<Check>& catalog();

/// Runs one check, timing it; numerical errors are caught and reported as a
/// failed check with the error in the diagnostics.
CheckResult run(const Check& check);

json to_json(const CheckResult& r);

/// "[PASS] 4 resolution of identity: measured 2.3e-06 <= 1e-08 (0.4 s < 10 s)"
std::string summary_line(const CheckResult& r);

}  // namespace circlecs::validation
