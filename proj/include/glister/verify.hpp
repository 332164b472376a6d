#pragma once

// Property and oracle suites behind `glister verify` and the acceptance test.
// Each check is self-contained: it generates its own data from `seed`.

#include "glister/active.hpp"
#include "glister/baselines.hpp"

#include <string>
#include <string_view>

namespace glister {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit_s = 0.0;  // 0 when the criterion has no runtime bound
};

CriterionResult check_gradients(std::uint64_t seed);
CriterionResult check_submodularity(std::uint64_t seed);
CriterionResult check_greedy_ratio(std::uint64_t seed);
CriterionResult check_taylor_fidelity(std::uint64_t seed);
CriterionResult check_label_noise(std::uint64_t seed);
CriterionResult check_class_imbalance(std::uint64_t seed);
CriterionResult check_active_learning(std::uint64_t seed);
CriterionResult check_descent_monitor(std::uint64_t seed);
CriterionResult check_efficiency(std::uint64_t seed);
CriterionResult check_determinism(std::uint64_t seed);

/// gradients, submodularity, greedy-ratio, taylor-fidelity, robustness,
/// determinism, all.
const std::vector<std::string_view>& suite_names();

/// Runs the named suite. Throws std::invalid_argument for an unknown name.
std::vector<CriterionResult> run_suite(std::string_view suite, std::uint64_t seed);

/// "PASS"/"FAIL" table, one line per criterion.
std::string format_results(const std::vector<CriterionResult>& results);

struct BenchConfig {
  Index n = 5000;
  Index d = 20;
  Index k = 500;
  double r_frac = 0.03;
  Index hidden = 100;
  Index val_size = 500;
  Index train_repeats = 5;
  std::uint64_t seed = 0;
};

struct BenchResult {
  Index n = 0, d = 0, k = 0, r = 0;
  double sel_s = 0.0;         // selection with r rounds
  double train_s = 0.0;       // one SGD epoch on a k-subset
  double sel_full_r_s = 0.0;  // selection with r = k
  double train_full_s = 0.0;  // one SGD epoch on all n rows
};

/// Selection times include building the selection problem. Epoch times are
/// the minimum over `train_repeats` epochs.
BenchResult run_bench(const BenchConfig& cfg);

}  // namespace glister
