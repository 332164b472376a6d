#pragma once

// Datasets: LIBSVM ingestion, stratified splits, label-noise and
// class-imbalance injectors, and the 2-D synthetic generators.

#include "glister/numerics.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace glister {

/// Dense features with integer class ids in [0, num_classes).
///
/// `noise_flipped[i]` marks rows whose label was corrupted by
/// inject_label_noise; `original_labels[i]` then keeps the clean label.
/// Unflipped rows always have original_labels[i] == labels[i].
struct Dataset {
  DenseMatrix features;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<bool> noise_flipped;
  std::vector<int> original_labels;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  /// Builds a dataset with clean provenance flags. Validates labels.
  static Dataset from(DenseMatrix features, std::vector<int> labels, int num_classes);

  /// Rows `idx` in the given order, provenance included.
  Dataset subset(std::span<const Index> idx) const;

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;
};

/// Per-class row counts.
std::vector<Index> class_counts(const Dataset& ds);
std::vector<Index> class_counts(std::span<const int> labels, int num_classes);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses LIBSVM text. Raw labels are remapped by sorting the distinct values
/// ascending; the dimension is the largest feature index seen. A parse of a
/// single-class file yields num_classes == 1.
Dataset parse_libsvm(std::string_view text);
Dataset load_libsvm(const std::string& path);

/// Writes class ids as labels and omits zero features.
std::string serialize_libsvm(const Dataset& ds);

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Per-class stratified split. Within each class the rows are shuffled, then
/// floor(val_frac * n_c) go to validation, floor(test_frac * n_c) to test and
/// the remainder to train. Each part keeps original row order.
Splits split(const Dataset& ds, const SplitSpec& spec);

/// Two-way stratified split (e.g. carving validation out of train).
std::pair<Dataset, Dataset> split_off(const Dataset& ds, double second_frac,
                                      std::uint64_t seed);

/// Flips exactly round(rate * n) rows (half away from zero) to a uniformly
/// chosen different class.
Dataset inject_label_noise(const Dataset& ds, double rate, std::uint64_t seed);

/// Picks ceil(affected_class_frac * C) classes and keeps ceil(keep_frac * n_c)
/// rows of each, chosen per class from a child stream of `seed`.
Dataset inject_class_imbalance(const Dataset& ds, double affected_class_frac,
                               double keep_frac, std::uint64_t seed);

/// Which classes inject_class_imbalance will shrink for this seed.
std::vector<int> imbalance_affected_classes(int num_classes, double affected_class_frac,
                                            std::uint64_t seed);

enum class SyntheticKind {
  kSeparable2,
  kSeparable4,
  kOverlapping4,
  kBinarySlack,
  kShiftedValidation2,
  kShiftedValidation4,
};

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view to_string(SyntheticKind kind);

/// Blob layout of a synthetic kind. Rows of `centers` are class means.
struct SyntheticLayout {
  DenseMatrix centers;
  double stddev;
  /// Translation applied to the companion validation set (shifted kinds).
  std::optional<Eigen::Vector2d> validation_offset;
};

/// Documented constants:
///   separable-2            centers (-2,0) (2,0), stddev 1
///   separable-4            centers (+-3,+-3), stddev 0.75
///   overlapping-4          centers (+-1.5,+-1.5), stddev 1
///   binary-slack           centers (-1.5,0) (1.5,0), stddev 1
///   shifted-validation-2   binary-slack, validation offset (0.5, 1.0)
///   shifted-validation-4   overlapping-4, validation offset (0.5, 1.0)
SyntheticLayout synthetic_layout(SyntheticKind kind);

struct SyntheticData {
  Dataset data;
  /// Present for the shifted-validation kinds only.
  std::optional<Dataset> shifted_validation;
};

SyntheticData gen_synthetic(SyntheticKind kind, Index n_per_class, std::uint64_t seed);

/// Gaussian blobs in `dim` dimensions with centers drawn from N(0, spread^2).
Dataset gen_gaussian_classes(Index n, Index dim, int num_classes, double spread,
                             std::uint64_t seed);

/// Per-feature standardization fitted on one dataset and applied to others.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Dataset& ds);
  Dataset apply(const Dataset& ds) const;
};

/// Largest row norm; the R of the cross-entropy weak-submodularity bound.
double max_row_norm(const DenseMatrix& x);

/// Equal-width binning fitted on one dataset. Values outside the fitted range
/// clamp to the end bins.
struct Binning {
  Eigen::RowVectorXd lo;
  Eigen::RowVectorXd width;
  int bins = 10;

  static Binning fit(const Dataset& ds, int bins = 10);
  /// Features replaced by bin ids 0..bins-1 (stored as doubles).
  Dataset apply(const Dataset& ds) const;
};

}  // namespace glister
