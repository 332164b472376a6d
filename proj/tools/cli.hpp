#pragma once

// Experiment configuration and the `glister` subcommands. main() only parses
// arguments; everything here is callable from tests.

#include "glister/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace glister::cli {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; `what()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kRun, kActive };

struct DatasetSpec {
  std::optional<SyntheticKind> synthetic;
  Index n_per_class = 500;
  std::string path;  // LIBSVM file when synthetic is unset
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  Mode mode = Mode::kRun;
  DatasetSpec dataset;
  double val_frac = 0.1;
  double test_frac = 0.2;
  bool standardize = true;
  Index hidden = 100;
  LossKind loss = LossKind::kCrossEntropy;
  double lr = 0.05;
  Index batch_size = 20;
  std::vector<std::uint64_t> seeds = {0};
  double noise_rate = 0.0;
  double imbalance_class_frac = 0.0;  // 0 disables the imbalance injector
  double imbalance_keep_frac = 0.1;
  std::filesystem::path output_dir;

  // Selection knobs shared by run and active.
  Index select_every = 20;
  std::optional<Index> rounds;  // absolute r; overrides r_frac
  double r_frac = 0.03;
  std::optional<double> eta;     // defaults to lr
  std::optional<double> lambda;  // defaults by regularizer
  Regularizer regularizer = Regularizer::kNone;
  GreedyKind greedy = GreedyKind::kNaive;
  double epsilon = 0.01;

  // run
  std::vector<Strategy> strategies = {Strategy::kGlister};
  std::vector<double> budgets = {0.1, 0.3, 0.5};
  Index epochs = 200;
  bool monitors = false;

  // active
  std::vector<Acquisition> acquisitions = {Acquisition::kGlister};
  Index initial_labeled = 20;
  Index batch = 50;
  Index active_rounds = 10;
  Index epochs_per_round = 200;
  Index fass_filter_mult = 5;
};

/// Validates keys and values. Unknown keys are errors. `base_dir` resolves a
/// relative output_dir or dataset path.
ExperimentConfig parse_config(const nlohmann::json& j, Mode mode,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& file, Mode mode);

/// 0.9 for random, 100 for facility location, 1 for dispersion, else 0.
double default_lambda(Regularizer r);

/// FNV-1a of the name.
std::uint64_t name_hash(std::string_view name);

/// seed xor name_hash(strategy) xor budget_index.
std::uint64_t cell_seed(std::uint64_t seed, std::string_view strategy, Index budget_index);

struct PreparedData {
  Dataset train, val, test;
  double max_row_norm = 0.0;  // after standardization
};

/// Builds (and corrupts) the splits for one config seed. Depends only on the
/// dataset section, split, corruption and `seed`, so every strategy sees the
/// same data.
PreparedData prepare_data(const ExperimentConfig& cfg, std::uint64_t seed);

GlisterConfig glister_config(const ExperimentConfig& cfg, Index k);

/// Trace file name: <strategy>_b<budget index>_s<seed>.csv.
std::string trace_name(std::string_view strategy, Index budget_index, std::uint64_t seed);

/// Writes traces/ and summary.json under output_dir; returns the summary.
nlohmann::json cmd_run(const ExperimentConfig& cfg);
nlohmann::json cmd_active(const ExperimentConfig& cfg);

nlohmann::json bench_json(const BenchResult& b);
BenchResult bench_from_json(const nlohmann::json& j);

}  // namespace glister::cli
