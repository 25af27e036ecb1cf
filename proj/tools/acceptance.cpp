// Runs the acceptance checks and prints one PASS/FAIL line per check.
//
//   acceptance [--json report.json] [id ...]
//
// Exit status is 0 only when every selected check passes.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <string>

#include "validation.hpp"

using namespace circlecs;

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--json" && i + 1 < argc) {
      json_path = argv[++i];
    } else {
      try {
        selected.insert(std::stoi(arg));
      } catch (const std::exception&) {
        std::cerr << "usage: acceptance [--json path] [id ...]\n";
        return 2;
      }
    }
  }

  json report = json::array();
  int failed = 0;
  for (const auto& check : validation::catalog()) {
    if (!selected.empty() && !selected.count(check.id)) continue;
    const auto r = validation::run(check);
    std::cout << validation::summary_line(r) << std::endl;
    report.push_back(validation::to_json(r));
    failed += !r.passed();
  }
  std::cout << (failed ? std::to_string(failed) + " check(s) failed" : "all checks passed") << std::endl;
  if (!json_path.empty()) write_file_atomic(json_path, report.dump(2) + "\n");
  return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
