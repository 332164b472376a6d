#include "glister/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace glister {

Strategy parse_strategy(std::string_view name) {
  if (name == "full") return Strategy::kFull;
  if (name == "random") return Strategy::kRandom;
  if (name == "random_prior") return Strategy::kRandomPrior;
  if (name == "craig") return Strategy::kCraig;
  if (name == "knnsub_train") return Strategy::kKnnSubTrain;
  if (name == "knnsub_val") return Strategy::kKnnSubVal;
  if (name == "glister") return Strategy::kGlister;
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kFull: return "full";
    case Strategy::kRandom: return "random";
    case Strategy::kRandomPrior: return "random_prior";
    case Strategy::kCraig: return "craig";
    case Strategy::kKnnSubTrain: return "knnsub_train";
    case Strategy::kKnnSubVal: return "knnsub_val";
    case Strategy::kGlister: return "glister";
  }
  return "?";
}

namespace {

void check_budget(Index k, Index n, const char* who) {
  if (k < 0 || k > n) throw std::invalid_argument(std::string(who) + ": budget out of range");
}

}  // namespace

std::vector<Index> random_subset(const Dataset& train, Index k, SeededRng& rng,
                                 const Dataset* match_distribution) {
  check_budget(k, train.size(), "random_subset");
  if (match_distribution == nullptr) return rng.sample_without_replacement(train.size(), k);

  const int classes = std::max(train.num_classes, match_distribution->num_classes);
  const MatroidQuota quota =
      MatroidQuota::proportional(train.labels, match_distribution->labels, classes, k);
  quota.validate(train.size());
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(classes));
  for (Index i = 0; i < train.size(); ++i)
    members[static_cast<std::size_t>(train.labels[static_cast<std::size_t>(i)])].push_back(i);
  std::vector<Index> out;
  for (int c = 0; c < classes; ++c) {
    const auto& m = members[static_cast<std::size_t>(c)];
    for (Index pos : rng.sample_without_replacement(static_cast<Index>(m.size()),
                                                    quota.budget[static_cast<std::size_t>(c)]))
      out.push_back(m[static_cast<std::size_t>(pos)]);
  }
  return out;
}

std::vector<Index> craig_subset(const Dataset& train, const ModelParams& params, Index k,
                                LossKind kind) {
  check_budget(k, train.size(), "craig_subset");
  const DenseMatrix grads = last_layer_per_sample_grads(params, train.features, train.labels, kind);
  DenseMatrix sim = pairwise_sq_dists(grads);
  const double d_max = sim.maxCoeff();
  sim = (d_max - sim.array()).matrix();
  const FacilityLocation f(std::move(sim));
  return lazy_greedy(f, k).selection;
}

std::vector<Index> knn_submod_subset(const Dataset& train, const Dataset& reference, Index k) {
  check_budget(k, train.size(), "knn_submod_subset");
  const int classes = std::max(train.num_classes, reference.num_classes);
  const auto train_counts = class_counts(train.labels, classes);
  const auto ref_counts = class_counts(reference.labels, classes);
  for (int c = 0; c < classes; ++c)
    if (ref_counts[static_cast<std::size_t>(c)] > 0 && train_counts[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("knn_submod_subset: reference class " + std::to_string(c) +
                                  " has no training rows");
  const MatroidQuota quota = MatroidQuota::proportional(train.labels, reference.labels, classes, k);
  const FacilityLocation f = FacilityLocation::from_features(
      train.features, train.labels, reference.features, reference.labels, true);
  return lazy_greedy(f, k, &quota).selection;
}

Selector make_selector(const StrategyConfig& cfg, const Dataset& train, const Dataset& val) {
  const GlisterConfig g = cfg.glister;
  const Index k = g.k;
  switch (cfg.strategy) {
    case Strategy::kFull: {
      std::vector<Index> all(static_cast<std::size_t>(train.size()));
      std::iota(all.begin(), all.end(), 0);
      return [all](const ModelParams&, Index, SeededRng&) { return all; };
    }
    case Strategy::kRandom:
      return [&train, k](const ModelParams&, Index, SeededRng& rng) {
        return random_subset(train, k, rng);
      };
    case Strategy::kRandomPrior:
      return [&train, &val, k](const ModelParams&, Index, SeededRng& rng) {
        return random_subset(train, k, rng, &val);
      };
    case Strategy::kCraig:
      return [&train, k, loss = g.loss](const ModelParams& p, Index, SeededRng&) {
        return craig_subset(train, p, k, loss);
      };
    case Strategy::kKnnSubTrain:
    case Strategy::kKnnSubVal: {
      const Dataset& ref = cfg.strategy == Strategy::kKnnSubTrain ? train : val;
      const auto fixed = knn_submod_subset(train, ref, k);
      return [fixed](const ModelParams&, Index, SeededRng&) { return fixed; };
    }
    case Strategy::kGlister: {
      g.validate(train.size());
      const auto reg = candidate_regularizer(train, g.regularizer);
      return [&train, &val, g, reg](const ModelParams& p, Index, SeededRng& rng) {
        const SelectionProblem problem = SelectionProblem::build(
            p, train.features, train.labels, val.features, val.labels, g.loss);
        return greedy_dss(problem, g, rng, reg.get()).selection;
      };
    }
  }
  throw std::invalid_argument("make_selector: unknown strategy");
}

RunResult run_strategy(const Dataset& train, const Dataset& val, const Dataset& test,
                       const TrainConfig& tc, const StrategyConfig& cfg) {
  return train_with_selection(train, val, test, tc, cfg.glister.select_every,
                              make_selector(cfg, train, val));
}

}  // namespace glister
