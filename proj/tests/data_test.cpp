#include "glister/data.hpp"
#include "glister/models.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace glister;

TEST(ParseLibsvm, SingleLine) {
  const Dataset ds = parse_libsvm("1 1:0.5 3:2.0\n");
  ASSERT_EQ(ds.size(), 1);
  ASSERT_EQ(ds.dim(), 3);
  EXPECT_EQ(ds.features(0, 0), 0.5);
  EXPECT_EQ(ds.features(0, 1), 0.0);
  EXPECT_EQ(ds.features(0, 2), 2.0);
  EXPECT_EQ(ds.num_classes, 1);
}

TEST(ParseLibsvm, SortedLabelRemap) {
  const Dataset ds = parse_libsvm("+1 1:1\n-1 1:2\n+1 2:3\n");
  EXPECT_EQ(ds.num_classes, 2);
  EXPECT_EQ(ds.labels, (std::vector<int>{1, 0, 1}));
}

TEST(ParseLibsvm, CommentsBlankLinesAndCrlf) {
  const Dataset ds = parse_libsvm("# header\r\n\r\n3 2:1.5 # trailing\r\n7 1:-1\r\n");
  ASSERT_EQ(ds.size(), 2);
  EXPECT_EQ(ds.features(0, 1), 1.5);
  EXPECT_EQ(ds.features(1, 0), -1.0);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1}));
}

TEST(ParseLibsvm, Errors) {
  try {
    parse_libsvm("1 1:0.5\nx 1:2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_libsvm("1 1:abc\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_libsvm("1 0:1\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 3:1 2:1\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 2:1 2:1\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 2\n"), ParseError);
}

TEST(ParseLibsvm, RoundTripFiveLines) {
  const std::string text =
      "0 1:0.25 4:-3.5\n"
      "2 2:1e-3\n"
      "1 1:7 2:8 3:9 4:10\n"
      "0 3:0.125\n"
      "2 4:123456.789\n";
  const Dataset a = parse_libsvm(text);
  const Dataset b = parse_libsvm(serialize_libsvm(a));
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.dim(), b.dim());
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.num_classes, b.num_classes);
  EXPECT_LE((a.features - b.features).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ParseLibsvm, RoundTripRandomDense) {
  SeededRng rng(4);
  DenseMatrix x(30, 5);
  std::vector<int> y;
  for (Index i = 0; i < 30; ++i) {
    for (Index j = 0; j < 5; ++j) x(i, j) = rng.uniform() < 0.3 ? 0.0 : rng.normal();
    y.push_back(static_cast<int>(i % 3));
  }
  x(0, 4) = 1.0;  // keep the full width visible to the parser
  const Dataset a = Dataset::from(x, y, 3);
  const Dataset b = parse_libsvm(serialize_libsvm(a));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_LE((a.features - b.features).cwiseAbs().maxCoeff(), 1e-12);
}

namespace {

Dataset balanced(Index n, int classes, std::uint64_t seed) {
  SeededRng rng(seed);
  DenseMatrix x(n, 2);
  std::vector<int> y;
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = static_cast<double>(i);  // row identity
    y.push_back(static_cast<int>(i % classes));
  }
  return Dataset::from(x, y, classes);
}

std::vector<Index> ids(const Dataset& ds) {
  std::vector<Index> out;
  for (Index i = 0; i < ds.size(); ++i) out.push_back(static_cast<Index>(ds.features(i, 1)));
  return out;
}

}  // namespace

TEST(Split, SizesAndDisjointCover) {
  const Dataset ds = balanced(100, 2, 1);
  const Splits s = split(ds, {0.8, 0.1, 0.1, 5});
  EXPECT_EQ(s.train.size(), 80);
  EXPECT_EQ(s.val.size(), 10);
  EXPECT_EQ(s.test.size(), 10);
  std::set<Index> all;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const Index i : ids(*part)) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 100u);
}

TEST(Split, DeterministicAndStratified) {
  const Dataset ds = balanced(200, 2, 2);
  const Splits a = split(ds, {0.8, 0.1, 0.1, 9});
  const Splits b = split(ds, {0.8, 0.1, 0.1, 9});
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.val), ids(b.val));
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    const auto c = class_counts(*part);
    EXPECT_LE(std::abs(c[0] - c[1]), 1);
  }
  const Splits other = split(ds, {0.8, 0.1, 0.1, 10});
  EXPECT_NE(ids(a.val), ids(other.val));
}

TEST(Split, InvalidSpecsAndEmptyParts) {
  const Dataset ds = balanced(100, 2, 1);
  EXPECT_THROW(split(ds, {0.9, 0.1, 0.0, 1}), std::invalid_argument);
  EXPECT_THROW(split(ds, {0.5, 0.1, 0.1, 1}), std::invalid_argument);
  EXPECT_THROW(split(balanced(6, 2, 1), {0.8, 0.1, 0.1, 1}), std::invalid_argument);
}

TEST(SplitOff, Fractions) {
  const Dataset ds = balanced(100, 2, 1);
  const auto [a, b] = split_off(ds, 0.1, 3);
  EXPECT_EQ(a.size(), 90);
  EXPECT_EQ(b.size(), 10);
}

TEST(LabelNoise, ExactCountAndFlags) {
  const Dataset ds = balanced(1000, 2, 3);
  const Dataset noisy = inject_label_noise(ds, 0.3, 17);
  Index flipped = 0;
  for (Index i = 0; i < noisy.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (noisy.noise_flipped[u]) {
      ++flipped;
      EXPECT_NE(noisy.labels[u], noisy.original_labels[u]);
      EXPECT_EQ(noisy.original_labels[u], ds.labels[u]);
    } else {
      EXPECT_EQ(noisy.labels[u], ds.labels[u]);
    }
  }
  EXPECT_EQ(flipped, 300);
  EXPECT_EQ(noisy.size(), ds.size());
  EXPECT_EQ(noisy.dim(), ds.dim());
  EXPECT_EQ(noisy.num_classes, ds.num_classes);
  EXPECT_EQ(noisy.features, ds.features);
}

TEST(LabelNoise, MultiClassFlipsToOtherClassesUniformly) {
  const Dataset ds = balanced(3000, 3, 3);
  const Dataset noisy = inject_label_noise(ds, 0.5, 1);
  std::vector<Index> to(3, 0);
  for (Index i = 0; i < ds.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (noisy.noise_flipped[u] && ds.labels[u] == 0) ++to[static_cast<std::size_t>(noisy.labels[u])];
  }
  EXPECT_EQ(to[0], 0);
  EXPECT_NEAR(static_cast<double>(to[1]) / static_cast<double>(to[1] + to[2]), 0.5, 0.06);
}

TEST(LabelNoise, ZeroRateAndRounding) {
  const Dataset ds = balanced(10, 2, 3);
  const Dataset same = inject_label_noise(ds, 0.0, 1);
  EXPECT_EQ(same.labels, ds.labels);
  EXPECT_EQ(same.noise_flipped, ds.noise_flipped);
  // 0.25 * 10 = 2.5 rounds half away from zero.
  const Dataset half = inject_label_noise(ds, 0.25, 1);
  EXPECT_EQ(std::count(half.noise_flipped.begin(), half.noise_flipped.end(), true), 3);
  EXPECT_THROW(inject_label_noise(ds, 1.0, 1), std::invalid_argument);
}

TEST(ClassImbalance, AffectedClassCountAndKeep) {
  const Dataset ds = balanced(1000, 10, 4);
  const auto affected = imbalance_affected_classes(10, 0.3, 21);
  EXPECT_EQ(affected.size(), 3u);
  const Dataset out = inject_class_imbalance(ds, 0.3, 0.1, 21);
  const auto before = class_counts(ds);
  const auto after = class_counts(out);
  for (int c = 0; c < 10; ++c) {
    const bool hit = std::binary_search(affected.begin(), affected.end(), c);
    EXPECT_EQ(after[static_cast<std::size_t>(c)], hit ? 10 : before[static_cast<std::size_t>(c)]);
  }
}

TEST(ClassImbalance, UnaffectedRowsUntouched) {
  const Dataset ds = balanced(400, 4, 5);
  const auto affected = imbalance_affected_classes(4, 0.3, 8);
  const Dataset out = inject_class_imbalance(ds, 0.3, 0.1, 8);
  std::set<Index> kept;
  for (Index i = 0; i < out.size(); ++i) {
    const Index id = static_cast<Index>(out.features(i, 1));
    kept.insert(id);
    EXPECT_EQ(out.features.row(i), ds.features.row(id));
    EXPECT_EQ(out.labels[static_cast<std::size_t>(i)], ds.labels[static_cast<std::size_t>(id)]);
  }
  for (Index i = 0; i < ds.size(); ++i) {
    const int c = ds.labels[static_cast<std::size_t>(i)];
    if (!std::binary_search(affected.begin(), affected.end(), c)) EXPECT_TRUE(kept.count(i));
  }
}

TEST(ClassImbalance, NearOneKeepAndErrors) {
  const Dataset ds = balanced(2000, 2, 6);
  const Dataset out = inject_class_imbalance(ds, 0.5, 0.999, 1);
  const auto counts = class_counts(out);
  EXPECT_EQ(counts[0] + counts[1], 1999);
  EXPECT_THROW(inject_class_imbalance(ds, 0.3, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(inject_class_imbalance(ds, 0.0, 0.5, 1), std::invalid_argument);
}

TEST(Synthetic, SizesAndKinds) {
  for (const char* name : {"separable-2", "separable-4", "overlapping-4", "binary-slack",
                           "shifted-validation-2", "shifted-validation-4"}) {
    const SyntheticKind kind = parse_synthetic_kind(name);
    EXPECT_EQ(to_string(kind), name);
    const SyntheticData d = gen_synthetic(kind, 2, 1);
    EXPECT_EQ(d.data.size(), 2 * d.data.num_classes);
    EXPECT_EQ(d.shifted_validation.has_value(), synthetic_layout(kind).validation_offset.has_value());
  }
  EXPECT_THROW(parse_synthetic_kind("spiral"), std::invalid_argument);
  EXPECT_THROW(gen_synthetic(SyntheticKind::kSeparable2, 1, 1), std::invalid_argument);
}

TEST(Synthetic, ShiftedValidationOffset) {
  const SyntheticLayout base = synthetic_layout(SyntheticKind::kShiftedValidation2);
  ASSERT_TRUE(base.validation_offset);
  EXPECT_EQ(*base.validation_offset, Eigen::Vector2d(0.5, 1.0));
  // With many samples the empirical class means track the shifted centers.
  const SyntheticData d = gen_synthetic(SyntheticKind::kShiftedValidation2, 20000, 3);
  for (int c = 0; c < 2; ++c) {
    Eigen::RowVector2d train_mean = Eigen::RowVector2d::Zero(), val_mean = Eigen::RowVector2d::Zero();
    Index nt = 0, nv = 0;
    for (Index i = 0; i < d.data.size(); ++i)
      if (d.data.labels[static_cast<std::size_t>(i)] == c) train_mean += d.data.features.row(i), ++nt;
    for (Index i = 0; i < d.shifted_validation->size(); ++i)
      if (d.shifted_validation->labels[static_cast<std::size_t>(i)] == c)
        val_mean += d.shifted_validation->features.row(i), ++nv;
    const Eigen::RowVector2d diff = val_mean / nv - train_mean / nt;
    EXPECT_NEAR(diff[0], 0.5, 0.05);
    EXPECT_NEAR(diff[1], 1.0, 0.05);
  }
}

TEST(Synthetic, SeparableTwoIsLinearlyLearnable) {
  const Dataset ds = gen_synthetic(SyntheticKind::kSeparable2, 200, 12).data;
  SeededRng rng(1);
  ModelParams p = init_params({2, 0, 2}, rng);
  std::vector<Index> all(static_cast<std::size_t>(ds.size()));
  for (Index i = 0; i < ds.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  SgdOptions opt;
  opt.lr = 0.01;
  for (int e = 0; e < 100; ++e) p = sgd_epoch(p, ds, all, opt, rng);
  // Class means are 4 standard deviations apart; the Bayes rate is ~97.7%,
  // so a trained linear probe should land close to it.
  EXPECT_GE(accuracy(p, ds.features, ds.labels), 0.96);
}

TEST(Standardizer, ZeroMeanUnitVariance) {
  const Dataset ds = gen_synthetic(SyntheticKind::kOverlapping4, 50, 2).data;
  const Standardizer s = Standardizer::fit(ds);
  const Dataset z = s.apply(ds);
  const Eigen::RowVectorXd mean = z.features.colwise().mean();
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::RowVectorXd var = z.features.array().square().colwise().mean();
  EXPECT_NEAR(var[0], 1.0, 1e-12);
  EXPECT_NEAR(var[1], 1.0, 1e-12);
}

TEST(Binning, EqualWidthAndClamp) {
  DenseMatrix x(3, 1);
  x << 0.0, 5.0, 10.0;
  const Dataset ds = Dataset::from(x, {0, 1, 0}, 2);
  const Binning b = Binning::fit(ds, 10);
  const Dataset binned = b.apply(ds);
  EXPECT_EQ(binned.features(0, 0), 0.0);
  EXPECT_EQ(binned.features(1, 0), 5.0);
  EXPECT_EQ(binned.features(2, 0), 9.0);
  DenseMatrix y(2, 1);
  y << -4.0, 40.0;
  const Dataset out = b.apply(Dataset::from(y, {0, 1}, 2));
  EXPECT_EQ(out.features(0, 0), 0.0);
  EXPECT_EQ(out.features(1, 0), 9.0);
}

TEST(Dataset, ValidateRejectsBadLabels) {
  DenseMatrix x = DenseMatrix::Zero(2, 1);
  EXPECT_THROW(Dataset::from(x, {0, 2}, 2), std::invalid_argument);
  EXPECT_THROW(Dataset::from(x, {0}, 2), std::invalid_argument);
}
