#pragma once

// Set functions over a ground set {0..n-1} and cardinality / partition-matroid
// constrained greedy maximizers.

#include "glister/data.hpp"
#include "glister/numerics.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace glister {

/// Runs fn(begin, end) over [0, n) split into contiguous blocks. The number of
/// threads is min(hardware threads, GLISTER_THREADS) and at least 1. Callers
/// write results into per-index slots, so the outcome does not depend on the
/// thread count.
void parallel_for(Index n, const std::function<void(Index, Index)>& fn);
int scoring_threads();

/// A set function with an incremental evaluator.
///
/// Greedy drivers grow a State one element at a time; value() and marginal()
/// replay a set through a fresh State. State::gain must be safe to call
/// concurrently.
class SetFunction {
 public:
  class State {
   public:
    virtual ~State() = default;
    /// f(S + e) - f(S) for the current S.
    virtual double gain(Index e) const = 0;
    virtual void add(Index e) = 0;
    virtual double value() const = 0;
  };

  virtual ~SetFunction() = default;
  virtual Index size() const = 0;
  virtual bool monotone() const = 0;
  virtual std::unique_ptr<State> start() const = 0;

  /// Throws on out-of-range or repeated elements.
  double value(std::span<const Index> s) const;
  double marginal(Index e, std::span<const Index> s) const;
};

/// f(S) = sum of w over S.
class ModularFunction : public SetFunction {
 public:
  explicit ModularFunction(Vector weights) : w_(std::move(weights)) {}
  Index size() const override { return w_.size(); }
  bool monotone() const override { return (w_.array() >= 0).all(); }
  std::unique_ptr<State> start() const override;
  const Vector& weights() const { return w_; }

 private:
  Vector w_;
};

/// f(S) = sum_{j in S} w_j - coeff * sum_{j,k in S} P_jk over ordered pairs,
/// diagonal included. Submodular when P is symmetric and nonnegative;
/// generally non-monotone.
class QuadraticFunction : public SetFunction {
 public:
  QuadraticFunction(Vector w, DenseMatrix p, double coeff);
  Index size() const override { return w_.size(); }
  bool monotone() const override { return false; }
  std::unique_ptr<State> start() const override;
  const Vector& modular() const { return w_; }
  const DenseMatrix& pairwise() const { return p_; }
  double coeff() const { return coeff_; }

 private:
  Vector w_;
  DenseMatrix p_;
  double coeff_;
};

/// f(S) = sum_i max_{s in S, class(s) == class(i)} sim(s, i), with the max
/// over an empty set taken as 0. `sim` is ground x covered. Without classes
/// every pair matches.
class FacilityLocation : public SetFunction {
 public:
  FacilityLocation(DenseMatrix sim, std::vector<int> ground_class = {},
                   std::vector<int> covered_class = {});
  Index size() const override { return sim_.rows(); }
  bool monotone() const override { return true; }
  std::unique_ptr<State> start() const override;
  const DenseMatrix& similarity() const { return sim_; }

  /// w(s, i) = d_max - |x_s - x_i|^2 with d_max the largest squared distance
  /// between any ground row and any covered row.
  static FacilityLocation from_features(const DenseMatrix& ground,
                                        std::span<const int> ground_labels,
                                        const DenseMatrix& covered,
                                        std::span<const int> covered_labels, bool per_class);

 private:
  DenseMatrix sim_;
  std::vector<int> ground_class_;
  std::vector<int> covered_class_;
};

/// f(S) = sum over pairs in S of the Euclidean distance between their rows.
/// Monotone and supermodular; used only as an additive diversity term.
class DispersionFunction : public SetFunction {
 public:
  explicit DispersionFunction(const DenseMatrix& features);
  Index size() const override { return dist_.rows(); }
  bool monotone() const override { return true; }
  std::unique_ptr<State> start() const override;
  const DenseMatrix& distances() const { return dist_; }

 private:
  DenseMatrix dist_;
};

/// Ground set and covered set are the rows of `features`.
FacilityLocation facility_location(const DenseMatrix& features, std::span<const int> labels,
                                   bool per_class);

/// Feature-based function over discretized training rows:
/// f(S) = sum_{j, v, y} m_{v,y}^j(V) * log m_{v,y}^j(S), where m counts rows
/// with feature j equal to v and label y. A zero count in S contributes
/// log(smoothing) instead of log 0.
class NaiveBayesFunction : public SetFunction {
 public:
  NaiveBayesFunction(const Dataset& train, const Dataset& val, double smoothing = 1e-2);
  Index size() const override { return static_cast<Index>(keys_.size()); }
  bool monotone() const override { return true; }
  std::unique_ptr<State> start() const override;

 private:
  friend class NaiveBayesState;
  // keys_[e] lists the (feature, value, label) cells that row e increments.
  std::vector<std::vector<Index>> keys_;
  std::vector<double> weight_;  // validation count per cell
  double log_smoothing_;
};

NaiveBayesFunction nb_feature_function(const Dataset& train, const Dataset& val);

struct KMeansResult {
  DenseMatrix centroids;
  std::vector<Index> assignment;
  std::vector<Index> sizes;
};

/// k-means++ seeding followed by `iterations` Lloyd steps. An emptied cluster
/// keeps its previous centroid.
KMeansResult kmeans(const DenseMatrix& x, Index clusters, SeededRng& rng, int iterations = 25);

struct RegressionData {
  DenseMatrix x;
  Vector y;
};

/// Pieces of the closed-form linear-regression objective.
struct LrSubmodularParts {
  DenseMatrix d;       // (sum_c |C_c|/N x_c x_c^T)^{-1}, ridge 1e-6 if singular
  bool ridged = false;
  Vector a;            // a_i = 2 (X_V^T y_V)^T D x_i y_i
  DenseMatrix s;       // s_ij = sum_{k in V} (x_k^T D x_i y_i)(x_k^T D x_j y_j)
  double s_min = 0.0;
};

LrSubmodularParts lr_submodular_parts(const RegressionData& train, const RegressionData& val,
                                      Index clusters, std::uint64_t seed);

/// F(S) = sum_{i in S} a_i - sum_{i,j in S} (s_ij - s_min).
QuadraticFunction lr_submodular(const RegressionData& train, const RegressionData& val,
                                Index clusters, std::uint64_t seed);

/// Per-class selection quotas over the ground set.
struct MatroidQuota {
  std::vector<int> element_class;
  std::vector<Index> budget;

  Index total() const;
  /// Throws if a class cannot fill its budget or sizes disagree.
  void validate(Index ground_size) const;

  /// budget_y = k * |reference_y| / |reference| rounded by largest remainder
  /// (ties to the lower class id) so the budgets sum to k.
  static MatroidQuota proportional(std::vector<int> element_class,
                                   std::span<const int> reference_labels, int num_classes,
                                   Index k);
};

/// Largest-remainder apportionment of k over `counts`.
std::vector<Index> largest_remainder(std::span<const Index> counts, Index k);

struct GreedyResult {
  std::vector<Index> selection;  // in pick order
  std::vector<double> gains;     // marginal gain of each pick
  Index evaluations = 0;         // gain() calls
  double value = 0.0;            // f(selection)
};

GreedyResult naive_greedy(const SetFunction& f, Index k, const MatroidQuota* quota = nullptr);

/// Same picks as naive_greedy on submodular f; stale gains are upper bounds
/// kept in a queue ordered by (bound desc, index asc).
GreedyResult lazy_greedy(const SetFunction& f, Index k, const MatroidQuota* quota = nullptr);

/// Each step scores s = min(remaining, ceil((n/k) ln(1/epsilon))) feasible
/// candidates drawn without replacement.
GreedyResult stochastic_greedy(const SetFunction& f, Index k, double epsilon, SeededRng& rng,
                               const MatroidQuota* quota = nullptr);

/// Each step picks uniformly among the k feasible candidates of largest gain.
/// Always returns exactly k elements.
GreedyResult randomized_greedy(const SetFunction& f, Index k, SeededRng& rng,
                               const MatroidQuota* quota = nullptr);

struct ExhaustiveResult {
  std::vector<Index> selection;  // ascending
  double value = 0.0;
};

/// Optimum over all k-subsets (exactly meeting the quota when given).
/// Refuses when C(n, k) exceeds 2e6.
ExhaustiveResult exhaustive_max(const SetFunction& f, Index k,
                                const MatroidQuota* quota = nullptr);

}  // namespace glister
