#include "glister/submodular.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace glister;

namespace {

const double kGreedyRatio = 1.0 - 1.0 / std::exp(1.0);

DenseMatrix random_points(Index n, Index d, SeededRng& rng) {
  DenseMatrix x(n, d);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

std::vector<int> cyclic_labels(Index n, int classes) {
  std::vector<int> y;
  for (Index i = 0; i < n; ++i) y.push_back(static_cast<int>(i % classes));
  return y;
}

// A random subset of [0, n) of size m, plus a superset of it of size m2, and
// an element outside the superset.
struct Triple {
  std::vector<Index> x, y;
  Index e;
};

Triple random_triple(Index n, SeededRng& rng) {
  auto perm = rng.sample_without_replacement(n, n);
  const Index big = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
  const Index small = big == 0 ? 0 : static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(big + 1)));
  Triple t;
  t.y.assign(perm.begin(), perm.begin() + big);
  t.x.assign(perm.begin(), perm.begin() + small);
  t.e = perm[static_cast<std::size_t>(big)];
  return t;
}

void expect_diminishing_returns(const SetFunction& f, int trials, std::uint64_t seed) {
  SeededRng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Triple tr = random_triple(f.size(), rng);
    EXPECT_GE(f.marginal(tr.e, tr.x), f.marginal(tr.e, tr.y) - 1e-9);
  }
}

RegressionData random_regression(Index n, Index d, SeededRng& rng, double scale = 1.0) {
  RegressionData r{random_points(n, d, rng), Vector(n)};
  for (Index i = 0; i < n; ++i) r.y[i] = scale * (r.x.row(i).sum() + 0.3 * rng.normal());
  return r;
}

}  // namespace

TEST(SetFunction, ValueRejectsBadSets) {
  const ModularFunction f(Vector::Ones(3));
  EXPECT_THROW(f.value(std::vector<Index>{0, 0}), std::invalid_argument);
  EXPECT_THROW(f.value(std::vector<Index>{3}), std::out_of_range);
}

TEST(NaiveGreedy, ModularIsTopK) {
  Vector w(6);
  w << 0.5, 3.0, -1.0, 2.0, 3.0, 0.1;
  const ModularFunction f(w);
  const auto r = naive_greedy(f, 3);
  EXPECT_EQ(r.selection, (std::vector<Index>{1, 4, 3}));
  EXPECT_DOUBLE_EQ(r.value, 8.0);
}

TEST(NaiveGreedy, KEqualsNSelectsEverything) {
  SeededRng rng(1);
  const auto f = facility_location(random_points(7, 2, rng), cyclic_labels(7, 2), false);
  auto sel = naive_greedy(f, 7).selection;
  std::sort(sel.begin(), sel.end());
  EXPECT_EQ(sel, (std::vector<Index>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(NaiveGreedy, FacilityLocationApproximationRatio) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(seed);
    const auto f = facility_location(random_points(12, 2, rng), cyclic_labels(12, 2), false);
    const double greedy = naive_greedy(f, 4).value;
    const double opt = exhaustive_max(f, 4).value;
    EXPECT_GE(greedy, kGreedyRatio * opt);
    EXPECT_LE(greedy, opt + 1e-12);
  }
}

TEST(LazyGreedy, IdenticalToNaiveOnFacilityLocation) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SeededRng rng(100 + seed);
    const Index n = 20 + static_cast<Index>(rng.uniform_int(20));
    const bool per_class = seed % 2 == 0;
    const auto f = facility_location(random_points(n, 3, rng), cyclic_labels(n, 3), per_class);
    const Index k = 1 + static_cast<Index>(rng.uniform_int(10));
    EXPECT_EQ(lazy_greedy(f, k).selection, naive_greedy(f, k).selection) << seed;
  }
}

TEST(LazyGreedy, ModularEvaluationCount) {
  SeededRng rng(2);
  Vector w(30);
  for (auto& v : w) v = rng.uniform();
  const ModularFunction f(w);
  const auto r = lazy_greedy(f, 10);
  EXPECT_EQ(r.evaluations, 30 + 9);
  EXPECT_EQ(r.selection, naive_greedy(f, 10).selection);
}

TEST(LazyGreedy, ZeroBudget) {
  const ModularFunction f(Vector::Ones(4));
  EXPECT_TRUE(lazy_greedy(f, 0).selection.empty());
  EXPECT_THROW(lazy_greedy(f, 5), std::invalid_argument);
}

TEST(LazyGreedy, TiesGoToLowestIndex) {
  const ModularFunction f(Vector::Ones(5));
  EXPECT_EQ(lazy_greedy(f, 3).selection, (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(naive_greedy(f, 3).selection, (std::vector<Index>{0, 1, 2}));
}

TEST(StochasticGreedy, TinyEpsilonMatchesNaive) {
  SeededRng pts(3);
  const auto f = facility_location(random_points(15, 2, pts), cyclic_labels(15, 1), false);
  SeededRng rng(4);
  // (15/3) ln(1e12) > 15, so every step sees the whole ground set.
  EXPECT_EQ(stochastic_greedy(f, 3, 1e-12, rng).selection, naive_greedy(f, 3).selection);
}

TEST(StochasticGreedy, MeanValueNearNaive) {
  SeededRng pts(5);
  const auto f = facility_location(random_points(100, 2, pts), cyclic_labels(100, 1), false);
  const double naive = naive_greedy(f, 10).value;
  double total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    total += stochastic_greedy(f, 10, 0.01, rng).value;
  }
  EXPECT_GE(total / 20, 0.9 * naive);
}

TEST(StochasticGreedy, DeterministicPerSeed) {
  SeededRng pts(6);
  const auto f = facility_location(random_points(50, 2, pts), cyclic_labels(50, 1), false);
  SeededRng a(9), b(9);
  EXPECT_EQ(stochastic_greedy(f, 5, 0.1, a).selection, stochastic_greedy(f, 5, 0.1, b).selection);
  EXPECT_THROW(stochastic_greedy(f, 5, 1.0, a), std::invalid_argument);
}

TEST(RandomizedGreedy, KOneIsDeterministicBest) {
  Vector w(5);
  w << 1, 5, 2, 4, 3;
  const ModularFunction f(w);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(seed);
    EXPECT_EQ(randomized_greedy(f, 1, rng).selection, std::vector<Index>{1});
  }
}

TEST(RandomizedGreedy, ExactCardinalityWithNegativeGains) {
  Vector w(8);
  w << 1, -2, -3, 0.5, -1, -4, 2, -5;
  const QuadraticFunction f(w, DenseMatrix::Constant(8, 8, 1.0), 1.0);
  SeededRng rng(7);
  const auto r = randomized_greedy(f, 6, rng);
  EXPECT_EQ(r.selection.size(), 6u);
  EXPECT_LT(*std::min_element(r.gains.begin(), r.gains.end()), 0.0);
  const std::set<Index> uniq(r.selection.begin(), r.selection.end());
  EXPECT_EQ(uniq.size(), 6u);
}

TEST(RandomizedGreedy, LrSubmodularOneOverE) {
  // Small training targets keep the modular term dominant, so the shifted
  // objective stays positive on k-sets as the 1/e guarantee presumes.
  SeededRng gen(8);
  const RegressionData train = random_regression(10, 3, gen, 0.05);
  const RegressionData val = random_regression(15, 3, gen);
  const auto f = lr_submodular(train, val, 10, 1);
  const double empty = f.value(std::vector<Index>{});
  const double opt = exhaustive_max(f, 4).value - empty;
  ASSERT_GT(opt, 0);
  double total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SeededRng rng(seed);
    total += randomized_greedy(f, 4, rng).value - empty;
  }
  EXPECT_GE(total / 50, opt / std::exp(1.0));
}

TEST(Exhaustive, ModularExample) {
  Vector w(4);
  w << 1, 2, 3, 4;
  const ModularFunction f(w);
  const auto r = exhaustive_max(f, 2);
  EXPECT_EQ(r.selection, (std::vector<Index>{2, 3}));
  EXPECT_DOUBLE_EQ(r.value, 7.0);
}

TEST(Exhaustive, AtLeastGreedyAndBudgetGuard) {
  SeededRng rng(9);
  const auto f = facility_location(random_points(10, 2, rng), cyclic_labels(10, 1), false);
  EXPECT_GE(exhaustive_max(f, 3).value, naive_greedy(f, 3).value);
  const ModularFunction big(Vector::Ones(60));
  EXPECT_THROW(exhaustive_max(big, 30), std::invalid_argument);
}

TEST(Exhaustive, QuotaPicksBestCrossClassPair) {
  Vector w(5);
  w << 5, 4, 3, 1, 0.5;
  const ModularFunction f(w);
  MatroidQuota q{{0, 0, 0, 1, 1}, {1, 1}};
  const auto r = exhaustive_max(f, 2, &q);
  // Enumerate by hand: best class-0 element is 0, best class-1 element is 3.
  EXPECT_EQ(r.selection, (std::vector<Index>{0, 3}));
  EXPECT_DOUBLE_EQ(r.value, 6.0);
}

TEST(Quota, GreedyMeetsQuotasExactly) {
  SeededRng rng(10);
  const auto labels = cyclic_labels(30, 3);
  const auto f = facility_location(random_points(30, 2, rng), labels, true);
  const std::vector<int> ref{0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  const MatroidQuota q = MatroidQuota::proportional(labels, ref, 3, 10);
  EXPECT_EQ(q.budget, (std::vector<Index>{4, 3, 3}));
  for (const auto& r : {naive_greedy(f, 10, &q), lazy_greedy(f, 10, &q)}) {
    std::vector<Index> per(3, 0);
    for (const Index e : r.selection) ++per[static_cast<std::size_t>(labels[static_cast<std::size_t>(e)])];
    EXPECT_EQ(per, q.budget);
  }
  EXPECT_EQ(naive_greedy(f, 10, &q).selection, lazy_greedy(f, 10, &q).selection);
  SeededRng s(1);
  const auto st = stochastic_greedy(f, 10, 0.1, s, &q);
  EXPECT_EQ(st.selection.size(), 10u);
}

TEST(Quota, InfeasibleAndMismatchedBudgets) {
  const ModularFunction f(Vector::Ones(4));
  MatroidQuota q{{0, 0, 0, 1}, {1, 2}};
  EXPECT_THROW(naive_greedy(f, 3, &q), std::invalid_argument);
  MatroidQuota r{{0, 0, 1, 1}, {1, 1}};
  EXPECT_THROW(naive_greedy(f, 3, &r), std::invalid_argument);
}

TEST(LargestRemainder, SumsToK) {
  const std::vector<Index> counts{1, 1, 1};
  EXPECT_EQ(largest_remainder(counts, 10), (std::vector<Index>{4, 3, 3}));
  const std::vector<Index> half{50, 50};
  EXPECT_EQ(largest_remainder(half, 10), (std::vector<Index>{5, 5}));
  const std::vector<Index> skew{7, 2, 1};
  EXPECT_EQ(largest_remainder(skew, 4), (std::vector<Index>{3, 1, 0}));
}

TEST(FacilityLocation, IdenticalPointsValueZero) {
  const DenseMatrix x = DenseMatrix::Ones(4, 2);
  const auto f = facility_location(x, cyclic_labels(4, 1), false);
  EXPECT_EQ(f.value(std::vector<Index>{0, 1, 2, 3}), 0.0);
}

TEST(FacilityLocation, TwoPoints) {
  DenseMatrix x(2, 2);
  x << 0, 0, 3, 4;
  const auto f = facility_location(x, cyclic_labels(2, 1), false);
  EXPECT_DOUBLE_EQ(f.value(std::vector<Index>{0}), 25.0);
}

TEST(FacilityLocation, MarginalIdentityAndProperties) {
  SeededRng rng(11);
  const auto x = random_points(8, 2, rng);
  for (const bool per_class : {false, true}) {
    const auto f = facility_location(x, cyclic_labels(8, 2), per_class);
    for (int t = 0; t < 50; ++t) {
      const Triple tr = random_triple(8, rng);
      std::vector<Index> with = tr.y;
      with.push_back(tr.e);
      EXPECT_NEAR(f.marginal(tr.e, tr.y), f.value(with) - f.value(tr.y), 1e-9);
      EXPECT_GE(f.marginal(tr.e, tr.y), -1e-9);
    }
    expect_diminishing_returns(f, 100, 12);
  }
}

TEST(FacilityLocation, PerClassMissingClassContributesZero) {
  DenseMatrix x(3, 1);
  x << 0, 1, 5;
  const auto f = facility_location(x, std::vector<int>{0, 0, 1}, true);
  // Only class-0 points are covered by element 0; the class-1 row stays at 0.
  EXPECT_DOUBLE_EQ(f.value(std::vector<Index>{0}), 25.0 + 24.0);
}

TEST(NaiveBayes, EmptySetValue) {
  DenseMatrix xt(3, 2), xv(2, 2);
  xt << 0, 1, 1, 1, 2, 0;
  xv << 0, 1, 2, 2;
  const Dataset train = Dataset::from(xt, {0, 1, 1}, 2);
  const Dataset val = Dataset::from(xv, {0, 1}, 2);
  const auto f = nb_feature_function(train, val);
  // Four validation (feature, value, label) cells, each weighted 1.
  EXPECT_NEAR(f.value(std::vector<Index>{}), 4 * std::log(1e-2), 1e-12);
}

TEST(NaiveBayes, IdenticalRowsHaveDecreasingGain) {
  DenseMatrix xt(3, 2), xv(3, 2);
  xt << 1, 2, 1, 2, 0, 0;
  xv << 1, 2, 1, 2, 0, 1;
  const Dataset train = Dataset::from(xt, {1, 1, 0}, 2);
  const Dataset val = Dataset::from(xv, {1, 1, 0}, 2);
  const auto f = nb_feature_function(train, val);
  const double first = f.marginal(0, std::vector<Index>{});
  const double second = f.marginal(1, std::vector<Index>{0});
  EXPECT_GT(first, second);
  EXPECT_GT(second, 0.0);
  EXPECT_NEAR(second, 2 * 2 * std::log(2.0), 1e-12);
}

TEST(NaiveBayes, DiminishingReturnsOnBinnedData) {
  const Dataset raw = gen_synthetic(SyntheticKind::kOverlapping4, 15, 3).data;
  const Binning bins = Binning::fit(raw, 4);
  const Dataset binned = bins.apply(raw);
  const auto [train, val] = split_off(binned, 0.3, 2);
  const auto f = nb_feature_function(train, val);
  expect_diminishing_returns(f, 100, 13);
  SeededRng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Triple tr = random_triple(f.size(), rng);
    EXPECT_GE(f.marginal(tr.e, tr.y), -1e-9);
  }
  DenseMatrix bad = DenseMatrix::Constant(1, 2, 0.5);
  EXPECT_THROW(nb_feature_function(Dataset::from(bad, {0}, 2), val), std::invalid_argument);
}

TEST(KMeans, SeparatesDistantBlobsDeterministically) {
  DenseMatrix x(20, 2);
  SeededRng rng(14);
  for (Index i = 0; i < 20; ++i) {
    x(i, 0) = (i < 10 ? -10.0 : 10.0) + 0.1 * rng.normal();
    x(i, 1) = 0.1 * rng.normal();
  }
  SeededRng a(3), b(3);
  const auto r = kmeans(x, 2, a);
  EXPECT_EQ(r.assignment, kmeans(x, 2, b).assignment);
  for (Index i = 1; i < 10; ++i) EXPECT_EQ(r.assignment[static_cast<std::size_t>(i)], r.assignment[0]);
  for (Index i = 11; i < 20; ++i) EXPECT_EQ(r.assignment[static_cast<std::size_t>(i)], r.assignment[10]);
  EXPECT_NE(r.assignment[0], r.assignment[10]);
  EXPECT_EQ(r.sizes[0] + r.sizes[1], 20);
}

TEST(LrSubmodular, ShiftedPairsNonnegativeAndGraphCutSubmodular) {
  SeededRng gen(15);
  const RegressionData train = random_regression(12, 3, gen);
  const RegressionData val = random_regression(20, 3, gen);
  const auto parts = lr_submodular_parts(train, val, 4, 2);
  EXPECT_FALSE(parts.ridged);
  const DenseMatrix s_hat = (parts.s.array() - parts.s_min).matrix();
  EXPECT_GE(s_hat.minCoeff(), 0.0);
  // s is the Gram matrix of u_i = X_V D x_i y_i; recompute by loops.
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) {
      double s = 0;
      for (Index k = 0; k < 20; ++k)
        s += (val.x.row(k) * parts.d * train.x.row(i).transpose())(0) * train.y[i] *
             (val.x.row(k) * parts.d * train.x.row(j).transpose())(0) * train.y[j];
      EXPECT_NEAR(parts.s(i, j), s, 1e-8 * std::max(1.0, std::abs(s)));
    }
  const QuadraticFunction cut(Vector::Zero(12), s_hat, 1.0);
  expect_diminishing_returns(cut, 100, 16);
  const auto f = lr_submodular(train, val, 4, 2);
  expect_diminishing_returns(f, 100, 17);
}

TEST(LrSubmodular, OrthogonalValidationGivesZeroPairs) {
  // Training rows lie on the first axis and validation rows on the second;
  // D is diagonal (ridged), so every x_k^T D x_i vanishes.
  DenseMatrix xt(4, 2), xv(3, 2);
  xt << 1, 0, 2, 0, -1, 0, 3, 0;
  xv << 0, 1, 0, -2, 0, 0.5;
  const RegressionData train{xt, Vector::Ones(4)};
  const RegressionData val{xv, Vector::Ones(3)};
  const auto parts = lr_submodular_parts(train, val, 2, 1);
  EXPECT_TRUE(parts.ridged);
  EXPECT_LE(parts.s.cwiseAbs().maxCoeff(), 1e-12);
  const QuadraticFunction f(Vector::LinSpaced(6, 1.0, 6.0), DenseMatrix::Zero(6, 6), 1.0);
  EXPECT_EQ(naive_greedy(f, 2).selection, (std::vector<Index>{5, 4}));
}

TEST(ParallelFor, CoversRangeOnce) {
  std::vector<int> hits(10000, 0);
  parallel_for(10000, [&](Index b, Index e) {
    for (Index i = b; i < e; ++i) ++hits[static_cast<std::size_t>(i)];
  });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 10000);
  EXPECT_GE(scoring_threads(), 1);
}

TEST(Dispersion, ValueIsSumOfPairwiseDistances) {
  DenseMatrix x(4, 2);
  x << 0, 0, 3, 4, 6, 8, 0, 1;
  const DispersionFunction f(x);
  const std::vector<Index> s = {0, 1, 2};
  EXPECT_NEAR(f.value(s), 5 + 10 + 5, 1e-12);
  const std::vector<Index> s2 = {3, 0};
  EXPECT_NEAR(f.value(s2), 1, 1e-12);
  EXPECT_NEAR(f.marginal(3, s), 1 + std::sqrt(9.0 + 9.0) + std::sqrt(36.0 + 49.0), 1e-12);
  EXPECT_DOUBLE_EQ(f.value(std::span<const Index>{}), 0.0);
}
