#pragma once

// Batch active learning over an unlabeled pool: the validation-driven
// acquisition with hypothesized labels, plus random and
// uncertainty-then-diversity (FASS) acquisition.

#include "glister/glister.hpp"

#include <string_view>

namespace glister {

/// Holds the pool's ground-truth labels and hands out only revealed ones.
/// Reading an unrevealed label throws and is counted.
class LabelOracle {
 public:
  LabelOracle(std::vector<int> truth, std::span<const Index> revealed);

  Index size() const { return static_cast<Index>(truth_.size()); }
  bool revealed(Index i) const;
  int label(Index i) const;
  void reveal(std::span<const Index> idx);
  Index tainted_reads() const { return tainted_reads_; }

 private:
  std::vector<int> truth_;
  std::vector<char> revealed_;
  mutable Index tainted_reads_ = 0;
};

struct PoolState {
  std::vector<Index> labeled;    // ascending
  std::vector<Index> unlabeled;  // ascending
  Index rounds = 0;
  std::vector<std::vector<Index>> batches;
  Index initial_size = 0;

  static PoolState start(Index pool_size, std::span<const Index> initial);
  /// Moves `batch` from unlabeled to labeled. Throws if any index is not
  /// currently unlabeled.
  void acquire(std::span<const Index> batch);
  /// Partition invariants; throws std::logic_error when broken.
  void check(Index pool_size) const;
};

/// Class-stratified seed set of `size` rows (largest-remainder quotas over the
/// pool's class counts, uniform within each class). Ascending.
std::vector<Index> stratified_initial(std::span<const int> labels, int num_classes, Index size,
                                      SeededRng& rng);

enum class Acquisition { kGlister, kRandom, kFass };
Acquisition parse_acquisition(std::string_view name);
std::string_view to_string(Acquisition a);

std::vector<Index> random_acquire(const PoolState& state, Index b, SeededRng& rng);

/// Keeps the filter_mult * b unlabeled rows of highest predictive entropy
/// (ties to the lower index), then picks b of them by lazy greedy on
/// facility location per hypothesized class over input features.
std::vector<Index> fass_acquire(const PoolState& state, const DenseMatrix& pool_features,
                                const ModelParams& params, Index b, Index filter_mult);

/// Entropy of the softmax (or of the sigmoid for one output) per row.
Vector predictive_entropy(const ModelParams& params, const DenseMatrix& x);

struct ActiveConfig {
  Acquisition acquisition = Acquisition::kGlister;
  Index initial_labeled = 20;
  Index batch = 50;
  Index rounds = 10;
  Index epochs_per_round = 200;
  Index fass_filter_mult = 5;
  ModelSpec model;
  SgdOptions sgd;
  GlisterConfig glister;  // k is replaced by the batch size
  std::uint64_t seed = 0;
};

struct ActiveRound {
  Index round = 0;
  Index labeled_count = 0;
  double val_loss = 0.0;
  double test_acc = 0.0;
  std::string batch_digest;
};

struct ActiveResult {
  ModelParams params;
  PoolState state;
  std::vector<ActiveRound> trace;
  Index tainted_reads = 0;

  static const char* csv_header();
  std::string to_csv() const;
};

/// Trains epochs_per_round epochs on the seed set, then each round acquires a
/// batch with the current model, reveals it and continues training for
/// epochs_per_round epochs on the grown labeled set. Trace rows are recorded
/// after that training. Streams: init = split(0), SGD = split(1),
/// acquisition = split(2), seed set = split(3).
ActiveResult run_active(const Dataset& pool, const Dataset& val, const Dataset& test,
                        const ActiveConfig& cfg);

/// As run_active with an explicit seed set.
ActiveResult run_active(const Dataset& pool, const Dataset& val, const Dataset& test,
                        const ActiveConfig& cfg, std::span<const Index> initial);

}  // namespace glister
