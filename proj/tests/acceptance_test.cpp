// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// Exit status is non-zero when any criterion fails.

#include "glister/verify.hpp"

#include <cstdio>
#include <exception>
#include <iostream>

int main() {
  using namespace glister;
  using Check = CriterionResult (*)(std::uint64_t);
  const Check checks[] = {check_gradients,     check_submodularity,   check_greedy_ratio,
                          check_taylor_fidelity, check_label_noise,   check_class_imbalance,
                          check_active_learning, check_descent_monitor,      check_efficiency,
                          check_determinism};
  int failed = 0;
  for (Check c : checks) {
    CriterionResult r;
    try {
      r = c(0);
    } catch (const std::exception& e) {
      r.name = "error";
      r.detail = e.what();
    }
    std::cout << format_results({r}) << std::flush;
    failed += r.pass ? 0 : 1;
  }
  std::printf("acceptance: %d/10 passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
