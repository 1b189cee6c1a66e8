#pragma once
// The eleven end-to-end checks, shared by `sfwm check` and the acceptance test.

#include <cstdint>
#include <string>
#include <vector>

namespace sfwm::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 42;
};

inline constexpr int kCriteria = 11;

CriterionResult run_criterion(int id, const Options& opts = {});
std::vector<CriterionResult> run_all(const Options& opts = {});

/// "PASS  3 brightness-chain  (0.01 s)  <detail>"
std::string format_line(const CriterionResult& r);
std::string to_json(const std::vector<CriterionResult>& results);

}  // namespace sfwm::acceptance
