#pragma once

// Subset-selection baselines and the strategy dispatch shared by the runner.

#include "glister/glister.hpp"

#include <string_view>

namespace glister {

enum class Strategy { kFull, kRandom, kRandomPrior, kCraig, kKnnSubTrain, kKnnSubVal, kGlister };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

/// Uniform k-subset. With `match_distribution`, per-class quotas follow that
/// set's class proportions (largest remainder) and each class is sampled
/// uniformly. Indices come out grouped by class in the latter case.
std::vector<Index> random_subset(const Dataset& train, Index k, SeededRng& rng,
                                 const Dataset* match_distribution = nullptr);

/// Facility location over last-layer gradient space,
/// sim(i, j) = d_max - |g_i - g_j|^2, maximized by lazy greedy. Unweighted.
std::vector<Index> craig_subset(const Dataset& train, const ModelParams& params, Index k,
                                LossKind kind);

/// Per-class facility location of `reference` rows covered by training rows,
/// with per-class quotas proportional to the reference class counts.
std::vector<Index> knn_submod_subset(const Dataset& train, const Dataset& reference, Index k);

struct StrategyConfig {
  Strategy strategy = Strategy::kGlister;
  GlisterConfig glister;  // k, L and loss are read by every strategy
};

/// Selector for train_with_selection. Static strategies (knnsub_*) compute
/// their subset once and return it on every call.
Selector make_selector(const StrategyConfig& cfg, const Dataset& train, const Dataset& val);

RunResult run_strategy(const Dataset& train, const Dataset& val, const Dataset& test,
                       const TrainConfig& tc, const StrategyConfig& cfg);

}  // namespace glister
