#pragma once

// Validation-driven subset selection: Taylor-approximated gains on the last
// layer, the r-round greedy selector, the online training loop with periodic
// reselection, loss-specific set-function proxies and the convergence
// monitors.
//
// Sign convention: gradients are gradients of the summed losses L (not of the
// log-likelihoods LL = -L). A lookahead step is theta^S = theta - eta * sum_S g_j
// and the Taylor gain of e is eta * g_e . grad L_V(theta^S), i.e. the
// first-order increase of LL_V.

#include "glister/data.hpp"
#include "glister/models.hpp"
#include "glister/submodular.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace glister {

enum class Regularizer { kNone, kFacilityLocation, kRandom, kDispersion };
enum class GreedyKind { kNaive, kLazy, kStochastic, kRandomized };

Regularizer parse_regularizer(std::string_view name);
std::string_view to_string(Regularizer r);
GreedyKind parse_greedy_kind(std::string_view name);
std::string_view to_string(GreedyKind g);

struct GlisterConfig {
  Index k = 1;              // budget
  Index select_every = 20;  // L
  Index rounds = 1;         // r, validation-gradient refreshes per selection
  double eta = 0.05;        // lookahead step
  Regularizer regularizer = Regularizer::kNone;
  double lambda = 0.0;
  GreedyKind greedy = GreedyKind::kNaive;
  double epsilon = 0.01;    // stochastic greedy
  LossKind loss = LossKind::kCrossEntropy;

  void validate(Index ground_size) const;
};

/// ceil(frac * k), at least 1 and at most k.
Index rounds_from_fraction(double frac, Index k);

/// Last-layer view of one selection call.
struct SelectionProblem {
  Layer base;                  // final layer at theta
  DenseMatrix h_train;         // penultimate candidate features
  std::vector<int> train_labels;
  DenseMatrix train_dz;        // candidate logit gradients at theta
  DenseMatrix train_grads;     // per-candidate last-layer loss gradients at theta
  DenseMatrix h_val;           // penultimate validation features
  std::vector<int> val_labels;
  LossKind loss = LossKind::kCrossEntropy;

  Index size() const { return train_grads.rows(); }

  static SelectionProblem build(const ModelParams& params, const DenseMatrix& x_train,
                                std::span<const int> train_labels, const DenseMatrix& x_val,
                                std::span<const int> val_labels, LossKind loss);
};

/// Cached lookahead state for Taylor gains.
///
/// Invariant: theta_lookahead == theta_base - eta * (sum of train_grads rows in
/// S). The validation gradient is exact right after refresh() and stale after
/// any fold().
class GainState {
 public:
  GainState(const SelectionProblem& problem, double eta);

  const Vector& theta_base() const { return theta_base_; }
  const Vector& theta_lookahead() const { return theta_; }
  const Vector& val_grad() const { return val_grad_; }
  double val_loss() const { return val_loss_; }
  Index refresh_count() const { return refreshes_; }
  bool stale() const { return stale_; }
  const std::vector<Index>& selected() const { return selected_; }

  /// eta * g_e . grad L_V(theta^S) with the cached validation gradient.
  double taylor_gain(Index e) const;
  /// taylor_gain for every candidate.
  Vector taylor_gains() const;

  void fold(Index e);
  void refresh();

 private:
  const SelectionProblem& p_;
  double eta_;
  Vector theta_base_;
  Vector theta_;
  Vector val_grad_;
  double val_loss_ = 0.0;
  Index refreshes_ = 0;
  bool stale_ = true;
  std::vector<Index> selected_;
};

/// L_V(theta^S) - L_V(theta^{S+e}) on the last layer, recomputed exactly.
double exact_gain(const SelectionProblem& problem, std::span<const Index> s, Index e,
                  double eta);

/// -L_V(theta^S) on the last layer (the exact lookahead objective G(S)).
double lookahead_objective(const SelectionProblem& problem, std::span<const Index> s,
                           double eta);

/// The exact set function G as a SetFunction (for enumeration tests).
std::unique_ptr<SetFunction> lookahead_function(const SelectionProblem& problem, double eta);

/// Loss-specific proxy whose maximizers over k-sets coincide with those of the
/// lookahead objective for linear last layers:
///   logistic        sum_i -log(1 + C_i exp(-sum_S a_ij)), monotone submodular
///   hinge/perceptron sum_i min(0, C_i + sum_S g_ij), monotone submodular
///   squared         modular minus eta^2 * shifted pairwise term, non-monotone
///   cross_entropy   modular plus -sum_i logsumexp, weakly submodular
/// `k` is the budget the constant shifts are computed for.
std::unique_ptr<SetFunction> taylor_proxy(const SelectionProblem& problem, double eta, Index k);

/// Lower bound g'_min / g'_max on the cross-entropy proxy's submodularity
/// ratio (g'_min is 1 by construction).
double cross_entropy_beta_bound(const SelectionProblem& problem, double eta);

/// Additive regularizer over the candidates' input features: per-class
/// facility location, or pairwise-distance dispersion. Null for the other
/// regularizers.
std::shared_ptr<const SetFunction> candidate_regularizer(const Dataset& train, Regularizer r);

struct GreedyDssResult {
  std::vector<Index> selection;  // pick order
  std::vector<double> scores;    // score each pick had when chosen
  Index refreshes = 0;
  Vector theta_lookahead;
};

/// r rounds; each refreshes the validation gradient at theta^S, scores the
/// remaining candidates by Taylor gain plus lambda times the regularizer
/// marginal, takes k/r of them (the remainder goes to the last round) and
/// folds their gradients into theta^S. Random regularization instead selects
/// round(lambda * k) elements this way and the rest uniformly at random.
/// `regularizer` is required for facility location and dispersion.
GreedyDssResult greedy_dss(const SelectionProblem& problem, const GlisterConfig& cfg,
                           SeededRng& rng, const SetFunction* regularizer = nullptr);

/// Convenience wrapper that builds the problem from a model and datasets.
std::vector<Index> greedy_dss(const Dataset& train, const Dataset& val, const ModelParams& params,
                              const GlisterConfig& cfg, SeededRng& rng);

// Training loop -------------------------------------------------------------

struct MonitorRecord {
  double dot_vt = 0.0;      // grad L_V . grad L_T(S) at theta_l
  double cos_theta = 0.0;
  double grad_norm_t = 0.0;
  double grad_norm_v = 0.0;
  double val_loss_before = 0.0;
  double param_norm = 0.0;
  double lr_bound = 0.0;    // filled by RunTrace::finalize
};

struct EpochRecord {
  Index epoch = 0;
  double wall_s = 0.0;  // cumulative selection + training time
  double sel_s = 0.0;   // cumulative selection time
  double train_loss = 0.0;       // subset loss after the epoch
  double full_train_loss = 0.0;
  double val_loss = 0.0;
  double test_acc = 0.0;
  std::string subset_digest;
  std::optional<MonitorRecord> monitor;  // selection epochs only
};

struct RunTrace {
  std::vector<EpochRecord> epochs;
  double lr = 0.0;
  /// Largest observed |grad L_V(a) - grad L_V(b)| / |a - b| between consecutive
  /// epochs; an estimate of the smoothness constant.
  double smoothness = 0.0;
  double sigma_t = 0.0;

  static const char* csv_header();
  std::string to_csv() const;
  /// Fills sigma_t and every lr_bound from the whole trace.
  void finalize();
};

struct TrainConfig {
  ModelSpec model;
  SgdOptions sgd;
  Index epochs = 200;
  std::uint64_t seed = 0;
  bool monitors = true;
};

struct RunResult {
  ModelParams params;
  std::vector<Index> subset;
  RunTrace trace;
};

/// Called at epochs t with t % select_every == 0; returns the training subset.
using Selector = std::function<std::vector<Index>(const ModelParams&, Index epoch, SeededRng&)>;

/// Generic loop: select every `select_every` epochs (including epoch 0), then
/// one SGD epoch on the current subset. Streams: init = split(0) of the seed,
/// SGD = split(1), selection = split(2).
RunResult train_with_selection(const Dataset& train, const Dataset& val, const Dataset& test,
                               const TrainConfig& tc, Index select_every, const Selector& select);

RunResult glister_online_train(const Dataset& train, const Dataset& val, const Dataset& test,
                               const TrainConfig& tc, const GlisterConfig& cfg);

struct DescentRow {
  Index epoch = 0;
  bool dot_nonnegative = false;
  bool lr_within_bound = false;
  bool val_rose = false;
  bool violation = false;  // both conditions held and validation loss rose
};

struct DescentReport {
  std::vector<DescentRow> rows;
  Index violations = 0;
  Index conditions_held = 0;
  double smoothness = 0.0;
  double sigma_t = 0.0;
};

/// `tolerance` is the rise in validation loss that counts as an increase.
DescentReport monitor_descent(const RunTrace& trace, double tolerance = 1e-7);

struct ConvergenceReport {
  double r = 0.0;          // 2 * max parameter norm
  double sigma_t = 0.0;    // max subset-gradient norm
  double delta_min = 0.0;  // min / max subset-gradient norm
  Index epochs = 0;
  double first_term = 0.0;
  double second_term = 0.0;
  double bound = 0.0;
  double gap = 0.0;        // min over selection epochs of L_V - min over trace
  std::vector<double> cos_theta;
};

/// Diagnostic evaluation of the convergence bound
///   R sigma_T / (delta_min sqrt(T)) + R sigma_T mean_l sqrt(1 - cos) / delta_min,
/// where the sum over epochs is estimated by T times the mean over selection
/// epochs.
ConvergenceReport monitor_convergence(const RunTrace& trace);

}  // namespace glister
