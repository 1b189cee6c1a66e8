// Runs the eleven acceptance criteria and prints one line per criterion.
// Exit status is nonzero when any criterion fails.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfwm/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sfwm acceptance suite"};
  std::uint64_t seed = 42;
  std::vector<int> only;
  std::string json_path;
  app.add_option("--seed", seed, "base seed for the Monte Carlo criteria");
  app.add_option("--only", only, "run only these criterion ids")->check(CLI::Range(1, sfwm::acceptance::kCriteria));
  app.add_option("--json", json_path, "also write the results as JSON");
  CLI11_PARSE(app, argc, argv);

  sfwm::acceptance::Options opts;
  opts.seed = seed;
  if (only.empty())
    for (int i = 1; i <= sfwm::acceptance::kCriteria; ++i) only.push_back(i);

  std::vector<sfwm::acceptance::CriterionResult> results;
  int failed = 0;
  for (int id : only) {
    results.push_back(sfwm::acceptance::run_criterion(id, opts));
    std::cout << sfwm::acceptance::format_line(results.back()) << std::endl;
    if (!results.back().pass) ++failed;
  }
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  if (!json_path.empty()) std::ofstream(json_path) << sfwm::acceptance::to_json(results);
  return failed == 0 ? 0 : 1;
}
