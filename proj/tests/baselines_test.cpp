#include "glister/baselines.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace glister;

namespace {

Dataset blobs(Index per_class, std::uint64_t seed) {
  return gen_synthetic(SyntheticKind::kSeparable2, per_class, seed).data;
}

std::vector<Index> sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<Index> iota_vec(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (auto s : {Strategy::kFull, Strategy::kRandom, Strategy::kRandomPrior, Strategy::kCraig,
                 Strategy::kKnnSubTrain, Strategy::kKnnSubVal, Strategy::kGlister})
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_THROW(parse_strategy("badge"), std::invalid_argument);
}

TEST(RandomSubset, FullBudgetAndDeterminism) {
  const Dataset d = blobs(10, 1);
  SeededRng a(3), b(3);
  EXPECT_EQ(sorted(random_subset(d, d.size(), a)), iota_vec(d.size()));
  SeededRng c(4), e(4);
  EXPECT_EQ(random_subset(d, 7, c), random_subset(d, 7, e));
  EXPECT_THROW(random_subset(d, d.size() + 1, b), std::invalid_argument);
}

TEST(RandomSubset, MatchDistributionQuotas) {
  // Imbalanced train, balanced reference: 5 per class.
  DenseMatrix x(30, 1);
  std::vector<int> y;
  for (Index i = 0; i < 30; ++i) {
    x(i, 0) = static_cast<double>(i);
    y.push_back(i < 24 ? 0 : 1);
  }
  const Dataset train = Dataset::from(x, y, 2);
  const Dataset ref = Dataset::from(DenseMatrix::Zero(4, 1), {0, 1, 0, 1}, 2);
  SeededRng rng(1);
  const auto s = random_subset(train, 10, rng, &ref);
  ASSERT_EQ(s.size(), 10u);
  const auto counts = class_counts(train.subset(s));
  EXPECT_EQ(counts, (std::vector<Index>{5, 5}));
  EXPECT_THROW(random_subset(train, 14, rng, &ref), std::invalid_argument);
}

TEST(Craig, IdenticalGradientsFollowTieRule) {
  // Same features, same label and a zero model: every gradient is identical.
  const std::vector<int> y(12, 0);
  const Dataset d = Dataset::from(DenseMatrix::Constant(12, 2, 0.5), y, 2);
  SeededRng rng(1);
  ModelParams p = init_params({2, 0, 2}, rng);
  for (auto& l : p.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  EXPECT_EQ(craig_subset(d, p, 4, LossKind::kCrossEntropy), (std::vector<Index>{0, 1, 2, 3}));
  EXPECT_EQ(sorted(craig_subset(d, p, d.size(), LossKind::kCrossEntropy)), iota_vec(d.size()));
}

TEST(Craig, ApproximationRatioOnSmallGround) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = blobs(6, 10 + seed);  // 12 rows
    SeededRng rng(seed);
    const ModelParams p = init_params({2, 5, 2}, rng);
    const auto sel = craig_subset(d, p, 4, LossKind::kCrossEntropy);
    // Independent rebuild of the gradient-space facility location.
    const DenseMatrix g = last_layer_per_sample_grads(p, d.features, d.labels, LossKind::kCrossEntropy);
    DenseMatrix sim(12, 12);
    double d_max = 0;
    for (Index i = 0; i < 12; ++i)
      for (Index j = 0; j < 12; ++j) d_max = std::max(d_max, (g.row(i) - g.row(j)).squaredNorm());
    for (Index i = 0; i < 12; ++i)
      for (Index j = 0; j < 12; ++j) sim(i, j) = d_max - (g.row(i) - g.row(j)).squaredNorm();
    const FacilityLocation f(sim);
    const double opt = exhaustive_max(f, 4).value;
    EXPECT_GE(f.value(sel), (1 - 1 / std::exp(1.0)) * opt);
  }
}

TEST(KnnSubmod, SinglePickMinimizesDistanceSum) {
  const Dataset all = blobs(8, 3);
  std::vector<Index> cls0;
  for (Index i = 0; i < all.size(); ++i)
    if (all.labels[static_cast<std::size_t>(i)] == 0) cls0.push_back(i);
  const Dataset d = all.subset(cls0);
  const auto s = knn_submod_subset(d, d, 1);
  ASSERT_EQ(s.size(), 1u);
  Index best = 0;
  double best_sum = 1e300;
  for (Index i = 0; i < d.size(); ++i) {
    double sum = 0;
    for (Index j = 0; j < d.size(); ++j)
      sum += (d.features.row(i) - d.features.row(j)).squaredNorm();
    if (sum < best_sum) best_sum = sum, best = i;
  }
  EXPECT_EQ(s[0], best);
}

TEST(KnnSubmod, PerClassMedoidsAndQuotas) {
  const Dataset d = blobs(10, 4);
  const auto s = knn_submod_subset(d, d, 2);
  ASSERT_EQ(s.size(), 2u);
  for (int c = 0; c < 2; ++c) {
    Index best = -1;
    double best_sum = 1e300;
    for (Index i = 0; i < d.size(); ++i) {
      if (d.labels[static_cast<std::size_t>(i)] != c) continue;
      double sum = 0;
      for (Index j = 0; j < d.size(); ++j)
        if (d.labels[static_cast<std::size_t>(j)] == c)
          sum += (d.features.row(i) - d.features.row(j)).squaredNorm();
      if (sum < best_sum) best_sum = sum, best = i;
    }
    EXPECT_NE(std::find(s.begin(), s.end(), best), s.end()) << "class " << c;
  }
  const auto big = knn_submod_subset(d, d, 9);
  EXPECT_EQ(class_counts(d.subset(big)), (std::vector<Index>{5, 4}));
}

TEST(KnnSubmod, ReferenceClassMissingFromTrain) {
  const Dataset d = blobs(5, 5);
  std::vector<Index> cls0;
  for (Index i = 0; i < d.size(); ++i)
    if (d.labels[static_cast<std::size_t>(i)] == 0) cls0.push_back(i);
  EXPECT_THROW(knn_submod_subset(d.subset(cls0), d, 2), std::invalid_argument);
}

TEST(RunStrategy, EveryStrategyHonoursBudget) {
  const Dataset all = blobs(30, 6);
  auto [rest, test] = split_off(all, 0.25, 1);
  auto [train, val] = split_off(rest, 0.2, 2);
  TrainConfig tc;
  tc.model = {2, 4, 2};
  tc.epochs = 3;
  tc.seed = 1;
  for (auto s : {Strategy::kFull, Strategy::kRandom, Strategy::kRandomPrior, Strategy::kCraig,
                 Strategy::kKnnSubTrain, Strategy::kKnnSubVal, Strategy::kGlister}) {
    StrategyConfig cfg;
    cfg.strategy = s;
    cfg.glister.k = 9;
    cfg.glister.select_every = 2;
    const RunResult r = run_strategy(train, val, test, tc, cfg);
    const auto expect = s == Strategy::kFull ? train.size() : 9;
    EXPECT_EQ(static_cast<Index>(r.subset.size()), expect) << to_string(s);
    auto u = sorted(r.subset);
    EXPECT_EQ(std::adjacent_find(u.begin(), u.end()), u.end());
    EXPECT_EQ(r.trace.epochs.size(), 3u);
  }
}
