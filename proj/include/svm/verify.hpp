#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svm/run.hpp"

namespace svm {

inline constexpr int kCriterionCount = 12;

struct VerifyOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t n_traj = 100'000;
  std::optional<std::filesystem::path> out_dir;  // c<id>_*.csv artifacts when set
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckLine> checks;  // ends with a c<id>_runtime line
  std::vector<std::filesystem::path> artifacts;
  double seconds = 0.0;
  double budget = 0.0;

  bool pass() const;
};

const char* criterion_title(int id);
double criterion_budget(int id);  // seconds

// Throws ConfigError for ids outside 1..kCriterionCount.
CriterionResult run_criterion(int id, const VerifyOptions& options);

}  // namespace svm
