// glister: run | active | verify | bench
//
// Exit codes: 0 success, 1 runtime failure or failed verification,
// 2 invalid arguments or configuration.

#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int run_config_command(const std::string& path, glister::cli::Mode mode) {
  using namespace glister::cli;
  ExperimentConfig cfg;
  try {
    cfg = load_config(path, mode);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  const auto summary = mode == Mode::kRun ? cmd_run(cfg) : cmd_active(cfg);
  std::cout << "wrote " << summary.size() << " runs to " << cfg.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validation-driven data subset selection and active learning"};
  app.require_subcommand(1);

  std::string run_config, active_config;
  auto* run = app.add_subcommand("run", "Train strategies x budgets x seeds from a JSON config");
  run->add_option("--config", run_config, "Experiment config (JSON)")->required();
  auto* active = app.add_subcommand("active", "Batch active learning from a JSON config");
  active->add_option("--config", active_config, "Experiment config (JSON)")->required();

  std::string suite;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Run a property/oracle suite");
  verify->add_option("--suite", suite, "gradients, submodularity, greedy-ratio, taylor-fidelity, "
                                       "robustness, determinism or all")
      ->required();
  verify->add_option("--seed", verify_seed, "Base seed");

  glister::BenchConfig bench_cfg;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time r-round vs r=k selection and subset training");
  bench->add_option("--n", bench_cfg.n, "Training rows")->check(CLI::PositiveNumber);
  bench->add_option("--d", bench_cfg.d, "Feature dimension")->check(CLI::PositiveNumber);
  bench->add_option("--k", bench_cfg.k, "Budget")->check(CLI::PositiveNumber);
  bench->add_option("--r-frac", bench_cfg.r_frac, "Taylor rounds as a fraction of k")
      ->check(CLI::Range(1e-9, 1.0));
  bench->add_option("--hidden", bench_cfg.hidden, "Hidden units");
  bench->add_option("--seed", bench_cfg.seed, "Seed");
  bench->add_option("--out", bench_out, "Also write the JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_config_command(run_config, glister::cli::Mode::kRun);
    if (*active) return run_config_command(active_config, glister::cli::Mode::kActive);
    if (*verify) {
      std::vector<glister::CriterionResult> results;
      try {
        results = glister::run_suite(suite, verify_seed);
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return 2;
      }
      std::cout << glister::format_results(results);
      for (const auto& r : results)
        if (!r.pass) return 1;
      return 0;
    }
    if (*bench) {
      if (bench_cfg.k > bench_cfg.n) {
        std::cerr << "--k must not exceed --n\n";
        return 2;
      }
      const auto j = glister::cli::bench_json(glister::run_bench(bench_cfg));
      std::cout << j.dump(2) << '\n';
      if (!bench_out.empty()) {
        std::ofstream out(bench_out);
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write " + bench_out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
