#include "glister/active.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace glister;

namespace {

struct Pools {
  Dataset pool, val, test;
};

Pools pools(Index per_class, std::uint64_t seed) {
  const Dataset all = gen_synthetic(SyntheticKind::kSeparable2, per_class, seed).data;
  auto [rest, test] = split_off(all, 0.2, seed + 1);
  auto [pool, val] = split_off(rest, 0.15, seed + 2);
  return {pool, val, test};
}

ActiveConfig small_config(Acquisition a) {
  ActiveConfig cfg;
  cfg.acquisition = a;
  cfg.initial_labeled = 6;
  cfg.batch = 5;
  cfg.rounds = 3;
  cfg.epochs_per_round = 4;
  cfg.model = {2, 6, 2};
  cfg.seed = 11;
  cfg.glister.rounds = 2;
  return cfg;
}

}  // namespace

TEST(LabelOracle, CountsReadsBeforeReveal) {
  const std::vector<Index> seed = {1};
  LabelOracle o({0, 1, 0}, seed);
  EXPECT_EQ(o.label(1), 1);
  EXPECT_THROW(o.label(0), std::logic_error);
  EXPECT_EQ(o.tainted_reads(), 1);
  const std::vector<Index> more = {0};
  o.reveal(more);
  EXPECT_EQ(o.label(0), 0);
  EXPECT_THROW(o.label(5), std::out_of_range);
}

TEST(PoolState, AcquireKeepsPartition) {
  const std::vector<Index> seed = {2, 0};
  PoolState s = PoolState::start(6, seed);
  EXPECT_EQ(s.labeled, (std::vector<Index>{0, 2}));
  const std::vector<Index> b1 = {5, 1};
  s.acquire(b1);
  s.check(6);
  EXPECT_EQ(s.labeled, (std::vector<Index>{0, 1, 2, 5}));
  EXPECT_EQ(s.unlabeled, (std::vector<Index>{3, 4}));
  const std::vector<Index> again = {1};
  EXPECT_THROW(s.acquire(again), std::invalid_argument);
  PoolState broken = s;
  broken.labeled.push_back(3);
  EXPECT_THROW(broken.check(6), std::logic_error);
}

TEST(StratifiedInitial, QuotasFollowClassCounts) {
  const std::vector<int> y = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  SeededRng rng(1);
  const auto s = stratified_initial(y, 2, 5, rng);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [&](Index i) { return y[static_cast<std::size_t>(i)] == 0; }),
            3);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}

TEST(RandomAcquire, SubsetOfUnlabeledAndDeterministic) {
  const std::vector<Index> seed = {0, 3};
  const PoolState s = PoolState::start(10, seed);
  SeededRng a(2), b(2);
  const auto x = random_acquire(s, 4, a);
  EXPECT_EQ(x, random_acquire(s, 4, b));
  for (Index i : x) EXPECT_TRUE(std::binary_search(s.unlabeled.begin(), s.unlabeled.end(), i));
  EXPECT_TRUE(random_acquire(s, 0, a).empty());
  EXPECT_THROW(random_acquire(s, 9, a), std::invalid_argument);
}

TEST(PredictiveEntropy, MatchesDirectFormula) {
  SeededRng rng(3);
  const ModelParams p = init_params({2, 4, 3}, rng);
  DenseMatrix x(5, 2);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const Vector h = predictive_entropy(p, x);
  const DenseMatrix z = forward(p, x);
  for (Index i = 0; i < 5; ++i) {
    double total = 0, e = 0;
    for (Index k = 0; k < 3; ++k) total += std::exp(z(i, k));
    for (Index k = 0; k < 3; ++k) {
      const double q = std::exp(z(i, k)) / total;
      e -= q * std::log(q);
    }
    EXPECT_NEAR(h(i), e, 1e-12);
  }
}

TEST(FassAcquire, FilterOneIsUncertaintyTopB) {
  const Pools d = pools(20, 4);
  SeededRng rng(5);
  const ModelParams p = init_params({2, 6, 2}, rng);
  const std::vector<Index> seed = {0, 1};
  const PoolState s = PoolState::start(d.pool.size(), seed);
  const auto got = fass_acquire(s, d.pool.features, p, 6, 1);
  DenseMatrix x(static_cast<Index>(s.unlabeled.size()), 2);
  for (std::size_t r = 0; r < s.unlabeled.size(); ++r)
    x.row(static_cast<Index>(r)) = d.pool.features.row(s.unlabeled[r]);
  const Vector h = predictive_entropy(p, x);
  std::vector<Index> order(s.unlabeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return h(a) > h(b); });
  std::vector<Index> expect;
  for (int i = 0; i < 6; ++i) expect.push_back(s.unlabeled[static_cast<std::size_t>(order[i])]);
  std::sort(expect.begin(), expect.end());
  auto sorted_got = got;
  std::sort(sorted_got.begin(), sorted_got.end());
  EXPECT_EQ(sorted_got, expect);
  EXPECT_THROW(fass_acquire(s, d.pool.features, p, 6, 0), std::invalid_argument);
}

TEST(FassAcquire, BeatsRandomBatchOnFacilityValue) {
  const Pools d = pools(40, 6);
  SeededRng init(7);
  const ModelParams p = init_params({2, 6, 2}, init);
  const std::vector<Index> seed = {0};
  const PoolState s = PoolState::start(d.pool.size(), seed);
  const Index b = 5, mult = 4;
  const auto got = fass_acquire(s, d.pool.features, p, b, mult);
  // Rebuild the filtered pool and its facility location.
  DenseMatrix x(static_cast<Index>(s.unlabeled.size()), 2);
  for (std::size_t r = 0; r < s.unlabeled.size(); ++r)
    x.row(static_cast<Index>(r)) = d.pool.features.row(s.unlabeled[r]);
  const Vector h = predictive_entropy(p, x);
  std::vector<Index> order(s.unlabeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) { return h(a) > h(c); });
  order.resize(static_cast<std::size_t>(b * mult));
  std::sort(order.begin(), order.end());
  DenseMatrix cand(b * mult, 2);
  for (Index r = 0; r < b * mult; ++r) cand.row(r) = x.row(order[static_cast<std::size_t>(r)]);
  const auto hyp = hypothesized_labels(p, cand);
  const FacilityLocation f = FacilityLocation::from_features(cand, hyp, cand, hyp, true);
  std::vector<Index> got_pos;
  for (Index g : got) {
    const auto u = std::lower_bound(s.unlabeled.begin(), s.unlabeled.end(), g) - s.unlabeled.begin();
    got_pos.push_back(std::lower_bound(order.begin(), order.end(), u) - order.begin());
  }
  double random_mean = 0;
  for (std::uint64_t seed_r = 0; seed_r < 20; ++seed_r) {
    SeededRng r(seed_r);
    random_mean += f.value(r.sample_without_replacement(b * mult, b)) / 20;
  }
  EXPECT_GE(f.value(got_pos), random_mean);
}

TEST(RunActive, BatchesDisjointAndTraceShape) {
  const Pools d = pools(30, 8);
  for (auto a : {Acquisition::kGlister, Acquisition::kRandom, Acquisition::kFass}) {
    const ActiveResult r = run_active(d.pool, d.val, d.test, small_config(a));
    ASSERT_EQ(r.trace.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t)
      EXPECT_EQ(r.trace[t].labeled_count, static_cast<Index>(6 + 5 * (t + 1)));
    EXPECT_EQ(r.tainted_reads, 0);
    EXPECT_NO_THROW(r.state.check(d.pool.size()));
    EXPECT_EQ(r.state.batches.size(), 3u);
    const std::string csv = r.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), ActiveResult::csv_header());
  }
}

TEST(RunActive, DeterministicPerSeed) {
  const Pools d = pools(30, 9);
  const auto cfg = small_config(Acquisition::kGlister);
  EXPECT_EQ(run_active(d.pool, d.val, d.test, cfg).to_csv(),
            run_active(d.pool, d.val, d.test, cfg).to_csv());
}

TEST(RunActive, WholePoolInOneRoundMatchesFullTraining) {
  const Pools d = pools(15, 10);
  ActiveConfig cfg = small_config(Acquisition::kGlister);
  const std::vector<Index> seed = {0, 1, 2};
  cfg.batch = d.pool.size() - 3;
  cfg.rounds = 1;
  cfg.glister.rounds = 1;
  const ActiveResult r = run_active(d.pool, d.val, d.test, cfg, seed);
  EXPECT_TRUE(r.state.unlabeled.empty());

  // Oracle: warm start on the seed rows, then the same epochs on the whole pool.
  const SeededRng root(cfg.seed);
  SeededRng init = root.split(0), sgd = root.split(1);
  ModelParams p = init_params(cfg.model, init);
  const Dataset seeds = d.pool.subset(seed);
  std::vector<Index> s_all(3), p_all(static_cast<std::size_t>(d.pool.size()));
  std::iota(s_all.begin(), s_all.end(), 0);
  std::iota(p_all.begin(), p_all.end(), 0);
  for (Index e = 0; e < cfg.epochs_per_round; ++e) p = sgd_epoch(p, seeds, s_all, cfg.sgd, sgd);
  for (Index e = 0; e < cfg.epochs_per_round; ++e) p = sgd_epoch(p, d.pool, p_all, cfg.sgd, sgd);
  EXPECT_EQ(p.flatten(), r.params.flatten());
}

TEST(RunActive, PoolExhausted) {
  const Pools d = pools(10, 11);
  ActiveConfig cfg = small_config(Acquisition::kRandom);
  cfg.batch = d.pool.size();
  EXPECT_THROW(run_active(d.pool, d.val, d.test, cfg), std::runtime_error);
}
