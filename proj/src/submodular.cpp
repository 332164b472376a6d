#include "glister/submodular.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <thread>

namespace glister {

int scoring_threads() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("GLISTER_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return threads;
}

void parallel_for(Index n, const std::function<void(Index, Index)>& fn) {
  const Index threads = std::min<Index>(scoring_threads(), n / 256 + 1);
  if (threads <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const Index block = (n + threads - 1) / threads;
  for (Index t = 0; t < threads; ++t) {
    const Index begin = t * block;
    const Index end = std::min(n, begin + block);
    if (begin < end) pool.emplace_back(fn, begin, end);
  }
  for (auto& th : pool) th.join();
}

namespace {

void check_set(const SetFunction& f, std::span<const Index> s) {
  std::vector<Index> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0 || sorted[i] >= f.size())
      throw std::out_of_range("set function: element out of range");
    if (i > 0 && sorted[i] == sorted[i - 1])
      throw std::invalid_argument("set function: repeated element");
  }
}

}  // namespace

double SetFunction::value(std::span<const Index> s) const {
  check_set(*this, s);
  auto state = start();
  for (const Index e : s) state->add(e);
  return state->value();
}

double SetFunction::marginal(Index e, std::span<const Index> s) const {
  check_set(*this, s);
  if (e < 0 || e >= size()) throw std::out_of_range("set function: element out of range");
  auto state = start();
  for (const Index x : s) state->add(x);
  return state->gain(e);
}

// Modular -------------------------------------------------------------------

namespace {

class ModularState : public SetFunction::State {
 public:
  explicit ModularState(const Vector& w) : w_(w) {}
  double gain(Index e) const override { return w_[e]; }
  void add(Index e) override { value_ += w_[e]; }
  double value() const override { return value_; }

 private:
  const Vector& w_;
  double value_ = 0.0;
};

}  // namespace

std::unique_ptr<SetFunction::State> ModularFunction::start() const {
  return std::make_unique<ModularState>(w_);
}

// Dispersion ----------------------------------------------------------------

namespace {

class DispersionState : public SetFunction::State {
 public:
  explicit DispersionState(const DenseMatrix& d) : d_(d), sum_(Vector::Zero(d.rows())) {}
  double gain(Index e) const override { return sum_[e]; }
  void add(Index e) override {
    value_ += sum_[e];
    sum_ += d_.col(e);
  }
  double value() const override { return value_; }

 private:
  const DenseMatrix& d_;
  Vector sum_;  // sum_[e] = sum over S of dist(e, j)
  double value_ = 0.0;
};

}  // namespace

DispersionFunction::DispersionFunction(const DenseMatrix& features)
    : dist_(pairwise_sq_dists(features).array().max(0.0).sqrt().matrix()) {}

std::unique_ptr<SetFunction::State> DispersionFunction::start() const {
  return std::make_unique<DispersionState>(dist_);
}

// Quadratic -----------------------------------------------------------------

namespace {

class QuadraticState : public SetFunction::State {
 public:
  explicit QuadraticState(const QuadraticFunction& f)
      : f_(f), into_(Vector::Zero(f.size())), out_of_(Vector::Zero(f.size())) {}

  double gain(Index e) const override {
    return f_.modular()[e] - f_.coeff() * (into_[e] + out_of_[e] + f_.pairwise()(e, e));
  }
  void add(Index e) override {
    value_ += gain(e);
    into_ += f_.pairwise().row(e).transpose();
    out_of_ += f_.pairwise().col(e);
  }
  double value() const override { return value_; }

 private:
  const QuadraticFunction& f_;
  Vector into_;    // into_[e] = sum_{j in S} P_je
  Vector out_of_;  // out_of_[e] = sum_{j in S} P_ej
  double value_ = 0.0;
};

}  // namespace

QuadraticFunction::QuadraticFunction(Vector w, DenseMatrix p, double coeff)
    : w_(std::move(w)), p_(std::move(p)), coeff_(coeff) {
  if (p_.rows() != w_.size() || p_.cols() != w_.size())
    throw std::invalid_argument("quadratic function: shape mismatch");
}

std::unique_ptr<SetFunction::State> QuadraticFunction::start() const {
  return std::make_unique<QuadraticState>(*this);
}

// Facility location ---------------------------------------------------------

namespace {

class FacilityState : public SetFunction::State {
 public:
  FacilityState(const DenseMatrix& sim, const std::vector<int>& ground_class,
                const std::vector<int>& covered_class)
      : sim_(sim),
        ground_class_(ground_class),
        covered_class_(covered_class),
        best_(Vector::Zero(sim.cols())) {}

  double gain(Index e) const override {
    const bool classed = !ground_class_.empty();
    const int c = classed ? ground_class_[static_cast<std::size_t>(e)] : 0;
    double g = 0;
    for (Index i = 0; i < sim_.cols(); ++i) {
      if (classed && covered_class_[static_cast<std::size_t>(i)] != c) continue;
      const double d = sim_(e, i) - best_[i];
      if (d > 0) g += d;
    }
    return g;
  }
  void add(Index e) override {
    const bool classed = !ground_class_.empty();
    const int c = classed ? ground_class_[static_cast<std::size_t>(e)] : 0;
    for (Index i = 0; i < sim_.cols(); ++i) {
      if (classed && covered_class_[static_cast<std::size_t>(i)] != c) continue;
      best_[i] = std::max(best_[i], sim_(e, i));
    }
  }
  double value() const override { return best_.sum(); }

 private:
  const DenseMatrix& sim_;
  const std::vector<int>& ground_class_;
  const std::vector<int>& covered_class_;
  Vector best_;
};

}  // namespace

FacilityLocation::FacilityLocation(DenseMatrix sim, std::vector<int> ground_class,
                                   std::vector<int> covered_class)
    : sim_(std::move(sim)),
      ground_class_(std::move(ground_class)),
      covered_class_(std::move(covered_class)) {
  if (ground_class_.empty() != covered_class_.empty())
    throw std::invalid_argument("facility location: give classes for both sides or neither");
  if (!ground_class_.empty() &&
      (static_cast<Index>(ground_class_.size()) != sim_.rows() ||
       static_cast<Index>(covered_class_.size()) != sim_.cols()))
    throw std::invalid_argument("facility location: class vector size mismatch");
  if ((sim_.array() < 0).any())
    throw std::invalid_argument("facility location: similarities must be nonnegative");
}

std::unique_ptr<SetFunction::State> FacilityLocation::start() const {
  return std::make_unique<FacilityState>(sim_, ground_class_, covered_class_);
}

FacilityLocation FacilityLocation::from_features(const DenseMatrix& ground,
                                                 std::span<const int> ground_labels,
                                                 const DenseMatrix& covered,
                                                 std::span<const int> covered_labels,
                                                 bool per_class) {
  if (ground.rows() < 1 || covered.rows() < 1)
    throw std::invalid_argument("facility location: needs at least one row");
  DenseMatrix sim = cross_sq_dists(ground, covered);
  const double d_max = sim.maxCoeff();
  sim = (d_max - sim.array()).matrix();
  if (!per_class) return FacilityLocation(std::move(sim));
  return FacilityLocation(std::move(sim),
                          std::vector<int>(ground_labels.begin(), ground_labels.end()),
                          std::vector<int>(covered_labels.begin(), covered_labels.end()));
}

FacilityLocation facility_location(const DenseMatrix& features, std::span<const int> labels,
                                   bool per_class) {
  return FacilityLocation::from_features(features, labels, features, labels, per_class);
}

// Naive Bayes feature function ----------------------------------------------

class NaiveBayesState : public SetFunction::State {
 public:
  explicit NaiveBayesState(const NaiveBayesFunction& f)
      : f_(f), count_(f.weight_.size(), 0) {
    for (const double w : f.weight_) value_ += w * f.log_smoothing_;
  }

  double gain(Index e) const override {
    double g = 0;
    for (const Index cell : f_.keys_[static_cast<std::size_t>(e)]) {
      const auto c = static_cast<std::size_t>(cell);
      g += f_.weight_[c] * (std::log(static_cast<double>(count_[c] + 1)) - log_count(c));
    }
    return g;
  }
  void add(Index e) override {
    value_ += gain(e);
    for (const Index cell : f_.keys_[static_cast<std::size_t>(e)])
      ++count_[static_cast<std::size_t>(cell)];
  }
  double value() const override { return value_; }

 private:
  double log_count(std::size_t c) const {
    return count_[c] == 0 ? f_.log_smoothing_ : std::log(static_cast<double>(count_[c]));
  }
  const NaiveBayesFunction& f_;
  std::vector<Index> count_;
  double value_ = 0.0;
};

NaiveBayesFunction::NaiveBayesFunction(const Dataset& train, const Dataset& val,
                                       double smoothing)
    : log_smoothing_(std::log(smoothing)) {
  if (val.size() == 0) throw std::invalid_argument("naive bayes function: empty validation set");
  if (train.dim() != val.dim())
    throw std::invalid_argument("naive bayes function: feature width mismatch");
  if (!(smoothing > 0 && smoothing < 1))
    throw std::invalid_argument("naive bayes function: smoothing must lie in (0, 1)");
  const int classes = std::max(train.num_classes, val.num_classes);
  auto check_discrete = [](const DenseMatrix& x) {
    for (Index i = 0; i < x.size(); ++i) {
      const double v = x.data()[i];
      if (v < 0 || v != std::floor(v))
        throw std::invalid_argument("naive bayes function: features must be bin ids");
    }
  };
  check_discrete(train.features);
  check_discrete(val.features);
  const double hi = std::max(train.size() ? train.features.maxCoeff() : 0.0,
                             val.features.maxCoeff());
  const auto values = static_cast<Index>(hi) + 1;
  auto cell = [&](Index j, double v, int y) {
    return (j * values + static_cast<Index>(v)) * classes + y;
  };
  weight_.assign(static_cast<std::size_t>(train.dim() * values * classes), 0.0);
  for (Index i = 0; i < val.size(); ++i)
    for (Index j = 0; j < val.dim(); ++j)
      weight_[static_cast<std::size_t>(
          cell(j, val.features(i, j), val.labels[static_cast<std::size_t>(i)]))] += 1.0;
  keys_.resize(static_cast<std::size_t>(train.size()));
  for (Index i = 0; i < train.size(); ++i)
    for (Index j = 0; j < train.dim(); ++j)
      keys_[static_cast<std::size_t>(i)].push_back(
          cell(j, train.features(i, j), train.labels[static_cast<std::size_t>(i)]));
}

std::unique_ptr<SetFunction::State> NaiveBayesFunction::start() const {
  return std::make_unique<NaiveBayesState>(*this);
}

NaiveBayesFunction nb_feature_function(const Dataset& train, const Dataset& val) {
  return NaiveBayesFunction(train, val);
}

// k-means and the linear-regression objective -------------------------------

KMeansResult kmeans(const DenseMatrix& x, Index clusters, SeededRng& rng, int iterations) {
  const Index n = x.rows();
  if (clusters < 1 || clusters > n) throw std::invalid_argument("kmeans: bad cluster count");
  KMeansResult out;
  out.centroids.resize(clusters, x.cols());
  // k-means++ seeding.
  out.centroids.row(0) = x.row(static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n))));
  Vector nearest = cross_sq_dists(x, out.centroids.topRows(1)).col(0);
  for (Index c = 1; c < clusters; ++c) {
    const double total = nearest.sum();
    Index pick = n - 1;
    if (total > 0) {
      double target = rng.uniform() * total;
      for (Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    }
    out.centroids.row(c) = x.row(pick);
    for (Index i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], (x.row(i) - out.centroids.row(c)).squaredNorm());
  }

  out.assignment.assign(static_cast<std::size_t>(n), 0);
  for (int it = 0; it <= iterations; ++it) {
    const DenseMatrix d = cross_sq_dists(x, out.centroids);
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      for (Index c = 1; c < clusters; ++c)
        if (d(i, c) < d(i, best)) best = c;
      out.assignment[static_cast<std::size_t>(i)] = best;
    }
    if (it == iterations) break;
    DenseMatrix sums = DenseMatrix::Zero(clusters, x.cols());
    std::vector<Index> sizes(static_cast<std::size_t>(clusters), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = out.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < clusters; ++c)
      if (sizes[static_cast<std::size_t>(c)] > 0)
        out.centroids.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
  }
  out.sizes.assign(static_cast<std::size_t>(clusters), 0);
  for (const Index c : out.assignment) ++out.sizes[static_cast<std::size_t>(c)];
  return out;
}

LrSubmodularParts lr_submodular_parts(const RegressionData& train, const RegressionData& val,
                                      Index clusters, std::uint64_t seed) {
  if (train.x.rows() != train.y.size() || val.x.rows() != val.y.size())
    throw std::invalid_argument("lr submodular: target count mismatch");
  if (train.x.cols() != val.x.cols())
    throw std::invalid_argument("lr submodular: feature width mismatch");
  if (clusters < 1) throw std::invalid_argument("lr submodular: clusters must be >= 1");
  const Index d = train.x.cols();
  SeededRng rng(seed);
  const KMeansResult km = kmeans(train.x, clusters, rng);
  DenseMatrix gram = DenseMatrix::Zero(d, d);
  const auto n = static_cast<double>(train.x.rows());
  for (Index c = 0; c < clusters; ++c) {
    const Vector xc = km.centroids.row(c).transpose();
    gram += (static_cast<double>(km.sizes[static_cast<std::size_t>(c)]) / n) * xc * xc.transpose();
  }

  LrSubmodularParts parts;
  Eigen::FullPivLU<DenseMatrix> lu(gram);
  if (lu.rank() < d) {
    gram += 1e-6 * DenseMatrix::Identity(d, d);
    parts.ridged = true;
    lu.compute(gram);
  }
  parts.d = lu.inverse();

  // u_i = X_V D x_i y_i, so s = U^T U and a_i = 2 y_V^T u_i.
  DenseMatrix u = val.x * parts.d * train.x.transpose();
  u = u.array().rowwise() * train.y.transpose().array();
  parts.a = 2.0 * (u.transpose() * val.y);
  parts.s = u.transpose() * u;
  parts.s_min = parts.s.minCoeff();
  return parts;
}

QuadraticFunction lr_submodular(const RegressionData& train, const RegressionData& val,
                                Index clusters, std::uint64_t seed) {
  LrSubmodularParts parts = lr_submodular_parts(train, val, clusters, seed);
  DenseMatrix s_hat = (parts.s.array() - parts.s_min).matrix();
  return QuadraticFunction(std::move(parts.a), std::move(s_hat), 1.0);
}

// Quotas --------------------------------------------------------------------

std::vector<Index> largest_remainder(std::span<const Index> counts, Index k) {
  Index total = 0;
  for (const Index c : counts) total += c;
  if (total <= 0) throw std::invalid_argument("largest remainder: no reference mass");
  std::vector<Index> out(counts.size());
  std::vector<std::pair<double, std::size_t>> rem;
  Index assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    // Integer arithmetic keeps exact shares exact.
    out[i] = (k * counts[i]) / total;
    assigned += out[i];
    rem.emplace_back(static_cast<double>((k * counts[i]) % total) / static_cast<double>(total), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < k; ++r, ++assigned) ++out[rem[r % rem.size()].second];
  return out;
}

Index MatroidQuota::total() const {
  Index t = 0;
  for (const Index b : budget) t += b;
  return t;
}

void MatroidQuota::validate(Index ground_size) const {
  if (static_cast<Index>(element_class.size()) != ground_size)
    throw std::invalid_argument("quota: class vector does not match the ground set");
  std::vector<Index> available(budget.size(), 0);
  for (const int c : element_class) {
    if (c < 0 || c >= static_cast<int>(budget.size()))
      throw std::invalid_argument("quota: element class out of range");
    ++available[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < budget.size(); ++c) {
    if (budget[c] < 0) throw std::invalid_argument("quota: negative budget");
    if (budget[c] > available[c])
      throw std::invalid_argument("quota infeasible: class " + std::to_string(c) + " has " +
                                  std::to_string(available[c]) + " elements, quota " +
                                  std::to_string(budget[c]));
  }
}

MatroidQuota MatroidQuota::proportional(std::vector<int> element_class,
                                        std::span<const int> reference_labels, int num_classes,
                                        Index k) {
  MatroidQuota q;
  q.element_class = std::move(element_class);
  q.budget = largest_remainder(class_counts(reference_labels, num_classes), k);
  return q;
}

// Greedy drivers ------------------------------------------------------------

namespace {

struct Feasibility {
  const MatroidQuota* quota;
  std::vector<Index> used;

  explicit Feasibility(const MatroidQuota* q) : quota(q) {
    if (q) used.assign(q->budget.size(), 0);
  }
  bool allows(Index e) const {
    if (!quota) return true;
    const auto c = static_cast<std::size_t>(quota->element_class[static_cast<std::size_t>(e)]);
    return used[c] < quota->budget[c];
  }
  void take(Index e) {
    if (quota) ++used[static_cast<std::size_t>(quota->element_class[static_cast<std::size_t>(e)])];
  }
};

void check_budget(const SetFunction& f, Index k, const MatroidQuota* quota) {
  if (k < 0 || k > f.size()) throw std::invalid_argument("greedy: k must lie in [0, n]");
  if (quota) {
    quota->validate(f.size());
    if (quota->total() != k) throw std::invalid_argument("greedy: quotas must sum to k");
  }
}

std::vector<double> score_all(const SetFunction::State& state, std::span<const Index> cand) {
  std::vector<double> gains(cand.size());
  parallel_for(static_cast<Index>(cand.size()), [&](Index b, Index e) {
    for (Index i = b; i < e; ++i)
      gains[static_cast<std::size_t>(i)] = state.gain(cand[static_cast<std::size_t>(i)]);
  });
  return gains;
}

// Index of the best (gain desc, element asc) entry; `cand` is ascending.
std::size_t best_of(const std::vector<double>& gains) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < gains.size(); ++i)
    if (gains[i] > gains[best]) best = i;
  return best;
}

}  // namespace

GreedyResult naive_greedy(const SetFunction& f, Index k, const MatroidQuota* quota) {
  check_budget(f, k, quota);
  GreedyResult out;
  auto state = f.start();
  Feasibility feas(quota);
  std::vector<bool> chosen(static_cast<std::size_t>(f.size()), false);
  for (Index step = 0; step < k; ++step) {
    std::vector<Index> cand;
    for (Index e = 0; e < f.size(); ++e)
      if (!chosen[static_cast<std::size_t>(e)] && feas.allows(e)) cand.push_back(e);
    if (cand.empty()) throw std::runtime_error("greedy: no feasible element left");
    const auto gains = score_all(*state, cand);
    out.evaluations += static_cast<Index>(cand.size());
    const std::size_t b = best_of(gains);
    const Index e = cand[b];
    state->add(e);
    feas.take(e);
    chosen[static_cast<std::size_t>(e)] = true;
    out.selection.push_back(e);
    out.gains.push_back(gains[b]);
  }
  out.value = state->value();
  return out;
}

GreedyResult lazy_greedy(const SetFunction& f, Index k, const MatroidQuota* quota) {
  check_budget(f, k, quota);
  GreedyResult out;
  if (k == 0) {
    out.value = f.start()->value();
    return out;
  }
  auto state = f.start();
  Feasibility feas(quota);
  struct Entry {
    double bound;
    Index e;
    Index fresh_at;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    return a.bound < b.bound || (a.bound == b.bound && a.e > b.e);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  std::vector<Index> all(static_cast<std::size_t>(f.size()));
  for (Index e = 0; e < f.size(); ++e) all[static_cast<std::size_t>(e)] = e;
  const auto initial = score_all(*state, all);
  out.evaluations += f.size();
  for (Index e = 0; e < f.size(); ++e) heap.push({initial[static_cast<std::size_t>(e)], e, 0});

  for (Index step = 0; step < k; ++step) {
    while (true) {
      if (heap.empty()) throw std::runtime_error("greedy: no feasible element left");
      Entry top = heap.top();
      heap.pop();
      if (!feas.allows(top.e)) continue;  // its class is full for good
      if (top.fresh_at == step) {
        state->add(top.e);
        feas.take(top.e);
        out.selection.push_back(top.e);
        out.gains.push_back(top.bound);
        break;
      }
      top.bound = state->gain(top.e);
      top.fresh_at = step;
      ++out.evaluations;
      heap.push(top);
    }
  }
  out.value = state->value();
  return out;
}

GreedyResult stochastic_greedy(const SetFunction& f, Index k, double epsilon, SeededRng& rng,
                               const MatroidQuota* quota) {
  if (!(epsilon > 0 && epsilon < 1))
    throw std::invalid_argument("stochastic greedy: epsilon must lie in (0, 1)");
  check_budget(f, k, quota);
  GreedyResult out;
  auto state = f.start();
  Feasibility feas(quota);
  std::vector<bool> chosen(static_cast<std::size_t>(f.size()), false);
  const auto sample_size = k == 0 ? 0
                                  : static_cast<Index>(std::ceil(
                                        static_cast<double>(f.size()) / static_cast<double>(k) *
                                        std::log(1.0 / epsilon)));
  for (Index step = 0; step < k; ++step) {
    std::vector<Index> pool;
    for (Index e = 0; e < f.size(); ++e)
      if (!chosen[static_cast<std::size_t>(e)] && feas.allows(e)) pool.push_back(e);
    if (pool.empty()) throw std::runtime_error("greedy: no feasible element left");
    const Index s = std::min(static_cast<Index>(pool.size()), sample_size);
    std::vector<Index> cand;
    for (const Index i : rng.sample_without_replacement(static_cast<Index>(pool.size()), s))
      cand.push_back(pool[static_cast<std::size_t>(i)]);
    std::sort(cand.begin(), cand.end());
    const auto gains = score_all(*state, cand);
    out.evaluations += s;
    const std::size_t b = best_of(gains);
    state->add(cand[b]);
    feas.take(cand[b]);
    chosen[static_cast<std::size_t>(cand[b])] = true;
    out.selection.push_back(cand[b]);
    out.gains.push_back(gains[b]);
  }
  out.value = state->value();
  return out;
}

GreedyResult randomized_greedy(const SetFunction& f, Index k, SeededRng& rng,
                               const MatroidQuota* quota) {
  check_budget(f, k, quota);
  GreedyResult out;
  auto state = f.start();
  Feasibility feas(quota);
  std::vector<bool> chosen(static_cast<std::size_t>(f.size()), false);
  for (Index step = 0; step < k; ++step) {
    std::vector<Index> cand;
    for (Index e = 0; e < f.size(); ++e)
      if (!chosen[static_cast<std::size_t>(e)] && feas.allows(e)) cand.push_back(e);
    if (cand.empty()) throw std::runtime_error("greedy: no feasible element left");
    const auto gains = score_all(*state, cand);
    out.evaluations += static_cast<Index>(cand.size());
    std::vector<std::size_t> order(cand.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return gains[a] > gains[b] || (gains[a] == gains[b] && a < b);
                      });
    const std::size_t pick = order[static_cast<std::size_t>(rng.uniform_int(top))];
    state->add(cand[pick]);
    feas.take(cand[pick]);
    chosen[static_cast<std::size_t>(cand[pick])] = true;
    out.selection.push_back(cand[pick]);
    out.gains.push_back(gains[pick]);
  }
  out.value = state->value();
  return out;
}

ExhaustiveResult exhaustive_max(const SetFunction& f, Index k, const MatroidQuota* quota) {
  check_budget(f, k, quota);
  const Index n = f.size();
  double combos = 1;
  for (Index i = 0; i < k; ++i) combos = combos * static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (combos > 2e6 + 0.5)
    throw std::invalid_argument("exhaustive_max: C(n, k) exceeds the 2e6 enumeration budget");

  ExhaustiveResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<Index> comb(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
  while (true) {
    bool feasible = true;
    if (quota) {
      std::vector<Index> used(quota->budget.size(), 0);
      for (const Index e : comb)
        ++used[static_cast<std::size_t>(quota->element_class[static_cast<std::size_t>(e)])];
      feasible = used == quota->budget;
    }
    if (feasible) {
      const double v = f.value(comb);
      if (v > best.value) {
        best.value = v;
        best.selection = comb;
      }
    }
    // Next combination in lexicographic order.
    Index i = k - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (best.selection.size() != static_cast<std::size_t>(k))
    throw std::runtime_error("exhaustive_max: no feasible subset");
  return best;
}

}  // namespace glister
