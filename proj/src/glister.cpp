#include "glister/glister.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace glister {

Regularizer parse_regularizer(std::string_view name) {
  if (name == "none") return Regularizer::kNone;
  if (name == "facility_location") return Regularizer::kFacilityLocation;
  if (name == "random") return Regularizer::kRandom;
  if (name == "dispersion") return Regularizer::kDispersion;
  throw std::invalid_argument("unknown regularizer: " + std::string(name));
}

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::kNone: return "none";
    case Regularizer::kFacilityLocation: return "facility_location";
    case Regularizer::kRandom: return "random";
    case Regularizer::kDispersion: return "dispersion";
  }
  return "?";
}

GreedyKind parse_greedy_kind(std::string_view name) {
  if (name == "naive") return GreedyKind::kNaive;
  if (name == "lazy") return GreedyKind::kLazy;
  if (name == "stochastic") return GreedyKind::kStochastic;
  if (name == "randomized") return GreedyKind::kRandomized;
  throw std::invalid_argument("unknown greedy kind: " + std::string(name));
}

std::string_view to_string(GreedyKind g) {
  switch (g) {
    case GreedyKind::kNaive: return "naive";
    case GreedyKind::kLazy: return "lazy";
    case GreedyKind::kStochastic: return "stochastic";
    case GreedyKind::kRandomized: return "randomized";
  }
  return "?";
}

void GlisterConfig::validate(Index ground_size) const {
  if (k < 1 || k > ground_size)
    throw std::invalid_argument("glister: budget k must be in [1, n]");
  if (select_every < 1) throw std::invalid_argument("glister: select_every must be >= 1");
  if (rounds < 1 || rounds > k) throw std::invalid_argument("glister: rounds must be in [1, k]");
  if (!std::isfinite(eta) || eta < 0) throw std::invalid_argument("glister: eta must be >= 0");
  if (!std::isfinite(lambda) || lambda < 0)
    throw std::invalid_argument("glister: lambda must be >= 0");
  if (regularizer == Regularizer::kRandom && lambda > 1)
    throw std::invalid_argument("glister: random mixing share lambda must be <= 1");
  if (!(epsilon > 0 && epsilon < 1))
    throw std::invalid_argument("glister: epsilon must be in (0, 1)");
}

Index rounds_from_fraction(double frac, Index k) {
  if (!(frac > 0) || k < 1) throw std::invalid_argument("rounds_from_fraction: bad arguments");
  const auto r = static_cast<Index>(std::ceil(frac * static_cast<double>(k) - 1e-9));
  return std::clamp<Index>(r, 1, k);
}

namespace {

DenseMatrix layer_logits(const Layer& l, const DenseMatrix& h) {
  DenseMatrix z = h * l.weight.transpose();
  z.rowwise() += l.bias.transpose();
  return z;
}

double margin_sign(int label) { return label == 1 ? 1.0 : -1.0; }

Layer layer_at(const SelectionProblem& p, const Vector& theta) {
  return Layer::unflatten(theta, p.base.out_dim(), p.base.in_dim());
}

double val_loss_at(const SelectionProblem& p, const Vector& theta) {
  return layer_loss(layer_at(p, theta), p.h_val, p.val_labels, p.loss);
}

// K_ij = h_val_i . h_train_j + 1, the inner product of the augmented features.
DenseMatrix augmented_kernel(const SelectionProblem& p) {
  DenseMatrix k = p.h_val * p.h_train.transpose();
  k.array() += 1.0;
  return k;
}

void check_element(Index e, Index n, const std::vector<char>& in_set) {
  if (e < 0 || e >= n) throw std::out_of_range("glister: candidate index out of range");
  if (in_set[static_cast<std::size_t>(e)])
    throw std::invalid_argument("glister: candidate already selected");
}

class LookaheadFunction : public SetFunction {
 public:
  LookaheadFunction(const SelectionProblem& p, double eta) : p_(p), eta_(eta) {}
  Index size() const override { return p_.size(); }
  bool monotone() const override { return false; }

  class St : public State {
   public:
    explicit St(const LookaheadFunction& f)
        : f_(f), theta_(f.p_.base.flatten()), value_(-val_loss_at(f.p_, theta_)) {}
    double gain(Index e) const override {
      const Vector next = theta_ - f_.eta_ * f_.p_.train_grads.row(e).transpose();
      return -val_loss_at(f_.p_, next) - value_;
    }
    void add(Index e) override {
      theta_ -= f_.eta_ * f_.p_.train_grads.row(e).transpose();
      value_ = -val_loss_at(f_.p_, theta_);
    }
    double value() const override { return value_; }

   private:
    const LookaheadFunction& f_;
    Vector theta_;
    double value_;
  };

  std::unique_ptr<State> start() const override { return std::make_unique<St>(*this); }

 private:
  const SelectionProblem& p_;
  double eta_;
};

// sum_i -softplus(log_c_i - sum_{j in S} a_ij)
class LogisticProxy : public SetFunction {
 public:
  LogisticProxy(DenseMatrix a, Vector log_c) : a_(std::move(a)), log_c_(std::move(log_c)) {}
  Index size() const override { return a_.cols(); }
  bool monotone() const override { return true; }

  class St : public State {
   public:
    explicit St(const LogisticProxy& f) : f_(f), acc_(Vector::Zero(f.a_.rows())) {
      value_ = 0;
      for (Index i = 0; i < acc_.size(); ++i) value_ -= softplus(f_.log_c_(i));
    }
    double gain(Index e) const override {
      double g = 0;
      for (Index i = 0; i < acc_.size(); ++i) {
        const double u = f_.log_c_(i) - acc_(i);
        g += softplus(u) - softplus(u - f_.a_(i, e));
      }
      return g;
    }
    void add(Index e) override {
      value_ += gain(e);
      acc_ += f_.a_.col(e);
    }
    double value() const override { return value_; }

   private:
    const LogisticProxy& f_;
    Vector acc_;
    double value_;
  };

  std::unique_ptr<State> start() const override { return std::make_unique<St>(*this); }

 private:
  DenseMatrix a_;  // |V| x n
  Vector log_c_;
};

// sum_i min(0, c_i + sum_{j in S} g_ij)
class MarginProxy : public SetFunction {
 public:
  MarginProxy(DenseMatrix g, Vector c) : g_(std::move(g)), c_(std::move(c)) {}
  Index size() const override { return g_.cols(); }
  bool monotone() const override { return true; }

  class St : public State {
   public:
    explicit St(const MarginProxy& f) : f_(f), acc_(f.c_) {}
    double gain(Index e) const override {
      double g = 0;
      for (Index i = 0; i < acc_.size(); ++i)
        g += std::min(0.0, acc_(i) + f_.g_(i, e)) - std::min(0.0, acc_(i));
      return g;
    }
    void add(Index e) override { acc_ += f_.g_.col(e); }
    double value() const override { return acc_.array().min(0.0).sum(); }

   private:
    const MarginProxy& f_;
    Vector acc_;
  };

  std::unique_ptr<State> start() const override { return std::make_unique<St>(*this); }

 private:
  DenseMatrix g_;
  Vector c_;
};

// sum_i sum_{j in S} alpha g''_{i j y_i} - sum_i logsumexp_k(f_ik - alpha sum_{j in S} g'_ijk)
// with g_ijk = dz_jk K_ij, g' = g - g_min + 1 and g'' = g_max - g.
class CrossEntropyProxy : public SetFunction {
 public:
  CrossEntropyProxy(DenseMatrix kernel, DenseMatrix dz, DenseMatrix f, std::vector<int> y,
                    double alpha)
      : kernel_(std::move(kernel)), dz_(std::move(dz)), f_(std::move(f)), y_(std::move(y)),
        alpha_(alpha) {
    g_min_ = std::numeric_limits<double>::infinity();
    g_max_ = -g_min_;
    for (Index k = 0; k < dz_.cols(); ++k) {
      for (Index j = 0; j < dz_.rows(); ++j) {
        const double d = dz_(j, k);
        const double lo = d >= 0 ? kernel_.col(j).minCoeff() : kernel_.col(j).maxCoeff();
        const double hi = d >= 0 ? kernel_.col(j).maxCoeff() : kernel_.col(j).minCoeff();
        g_min_ = std::min(g_min_, d * lo);
        g_max_ = std::max(g_max_, d * hi);
      }
    }
  }
  Index size() const override { return dz_.rows(); }
  bool monotone() const override { return true; }
  double g_prime_max() const { return g_max_ - g_min_ + 1; }

  class St : public State {
   public:
    explicit St(const CrossEntropyProxy& f) : f_(f), shifted_(f.f_) {
      value_ = 0;
      for (Index i = 0; i < shifted_.rows(); ++i) value_ -= log_sum_exp(shifted_.row(i));
    }
    double gain(Index e) const override {
      double g = 0;
      Vector row(shifted_.cols());
      for (Index i = 0; i < shifted_.rows(); ++i) {
        const double kie = f_.kernel_(i, e);
        const auto yi = f_.y_[static_cast<std::size_t>(i)];
        g += f_.alpha_ * (f_.g_max_ - f_.dz_(e, yi) * kie);
        for (Index k = 0; k < row.size(); ++k)
          row(k) = shifted_(i, k) - f_.alpha_ * (f_.dz_(e, k) * kie - f_.g_min_ + 1);
        g += log_sum_exp(shifted_.row(i)) - log_sum_exp(row);
      }
      return g;
    }
    void add(Index e) override {
      value_ += gain(e);
      for (Index i = 0; i < shifted_.rows(); ++i) {
        const double kie = f_.kernel_(i, e);
        for (Index k = 0; k < shifted_.cols(); ++k)
          shifted_(i, k) -= f_.alpha_ * (f_.dz_(e, k) * kie - f_.g_min_ + 1);
      }
    }
    double value() const override { return value_; }

   private:
    const CrossEntropyProxy& f_;
    DenseMatrix shifted_;
    double value_;
  };

  std::unique_ptr<State> start() const override { return std::make_unique<St>(*this); }

 private:
  DenseMatrix kernel_;  // |V| x n
  DenseMatrix dz_;      // n x C
  DenseMatrix f_;       // |V| x C
  std::vector<int> y_;
  double alpha_;
  double g_min_ = 0, g_max_ = 0;
};

}  // namespace

SelectionProblem SelectionProblem::build(const ModelParams& params, const DenseMatrix& x_train,
                                         std::span<const int> train_labels,
                                         const DenseMatrix& x_val,
                                         std::span<const int> val_labels, LossKind loss) {
  params.validate();
  if (x_train.rows() != static_cast<Index>(train_labels.size()) ||
      x_val.rows() != static_cast<Index>(val_labels.size()))
    throw std::invalid_argument("SelectionProblem: feature and label counts differ");
  if (x_train.rows() < 1 || x_val.rows() < 1)
    throw std::invalid_argument("SelectionProblem: empty candidate or validation set");
  check_labels(train_labels, loss, params.output_dim());
  check_labels(val_labels, loss, params.output_dim());

  SelectionProblem p;
  p.base = params.last();
  p.loss = loss;
  p.h_train = penultimate(params, x_train);
  p.train_labels.assign(train_labels.begin(), train_labels.end());
  p.train_dz = logit_grads(layer_logits(p.base, p.h_train), train_labels, loss);
  p.train_grads = layer_per_sample_grads(p.base, p.h_train, train_labels, loss);
  p.h_val = penultimate(params, x_val);
  p.val_labels.assign(val_labels.begin(), val_labels.end());
  return p;
}

GainState::GainState(const SelectionProblem& problem, double eta)
    : p_(problem), eta_(eta), theta_base_(problem.base.flatten()), theta_(theta_base_) {
  refresh();
}

double GainState::taylor_gain(Index e) const {
  if (e < 0 || e >= p_.size()) throw std::out_of_range("taylor_gain: candidate out of range");
  return eta_ * p_.train_grads.row(e).dot(val_grad_);
}

Vector GainState::taylor_gains() const {
  Vector out(p_.size());
  parallel_for(p_.size(), [&](Index begin, Index end) {
    out.segment(begin, end - begin).noalias() =
        eta_ * (p_.train_grads.middleRows(begin, end - begin) * val_grad_);
  });
  return out;
}

void GainState::fold(Index e) {
  if (e < 0 || e >= p_.size()) throw std::out_of_range("fold: candidate out of range");
  if (std::find(selected_.begin(), selected_.end(), e) != selected_.end())
    throw std::invalid_argument("fold: candidate already selected");
  theta_ -= eta_ * p_.train_grads.row(e).transpose();
  selected_.push_back(e);
  stale_ = true;
}

void GainState::refresh() {
  const Layer l = layer_at(p_, theta_);
  val_grad_ = layer_grad(l, p_.h_val, p_.val_labels, p_.loss);
  val_loss_ = layer_loss(l, p_.h_val, p_.val_labels, p_.loss);
  stale_ = false;
  ++refreshes_;
}

double lookahead_objective(const SelectionProblem& problem, std::span<const Index> s,
                           double eta) {
  std::vector<char> in_set(static_cast<std::size_t>(problem.size()), 0);
  Vector theta = problem.base.flatten();
  for (Index e : s) {
    check_element(e, problem.size(), in_set);
    in_set[static_cast<std::size_t>(e)] = 1;
    theta -= eta * problem.train_grads.row(e).transpose();
  }
  return -val_loss_at(problem, theta);
}

double exact_gain(const SelectionProblem& problem, std::span<const Index> s, Index e,
                  double eta) {
  std::vector<Index> with(s.begin(), s.end());
  with.push_back(e);
  return lookahead_objective(problem, with, eta) - lookahead_objective(problem, s, eta);
}

std::unique_ptr<SetFunction> lookahead_function(const SelectionProblem& problem, double eta) {
  return std::make_unique<LookaheadFunction>(problem, eta);
}

std::unique_ptr<SetFunction> taylor_proxy(const SelectionProblem& p, double eta, Index k) {
  if (k < 1 || k > p.size()) throw std::invalid_argument("taylor_proxy: budget out of range");
  if (!(eta >= 0)) throw std::invalid_argument("taylor_proxy: eta must be >= 0");
  const DenseMatrix kernel = augmented_kernel(p);
  const DenseMatrix f = layer_logits(p.base, p.h_val);
  const Index nv = kernel.rows();
  const Index n = kernel.cols();
  const auto kd = static_cast<double>(k);

  if (is_margin_loss(p.loss)) {
    // g_ij = -y_i dz_j K_ij, the per-element change in validation margin.
    DenseMatrix g(nv, n);
    Vector yf(nv);
    for (Index i = 0; i < nv; ++i) {
      const double y = margin_sign(p.val_labels[static_cast<std::size_t>(i)]);
      yf(i) = y * f(i, 0);
      for (Index j = 0; j < n; ++j) g(i, j) = -y * p.train_dz(j, 0) * kernel(i, j);
    }
    if (p.loss == LossKind::kLogistic) {
      const double g_min = g.minCoeff();
      DenseMatrix a = eta * (g.array() - g_min).matrix();
      Vector log_c = (-yf.array() - eta * kd * g_min).matrix();
      return std::make_unique<LogisticProxy>(std::move(a), std::move(log_c));
    }
    g *= eta;
    const double g_min = g.minCoeff();
    const double offset = p.loss == LossKind::kHinge ? -1.0 : 0.0;
    Vector c = (yf.array() + offset + kd * g_min).matrix();
    g.array() -= g_min;
    return std::make_unique<MarginProxy>(std::move(g), std::move(c));
  }

  if (p.loss == LossKind::kSquared) {
    // Residuals r = f - t recovered from dz = 2 (f - t).
    const DenseMatrix r = 0.5 * logit_grads(f, p.val_labels, p.loss);
    const Index width = f.cols();
    DenseMatrix m(nv * width, n);  // m_{(i,c), j} = dz_jc K_ij
    for (Index i = 0; i < nv; ++i)
      for (Index c = 0; c < width; ++c)
        m.row(i * width + c) = (p.train_dz.col(c).transpose().array() * kernel.row(i).array());
    Vector w = Vector::Zero(n);
    for (Index i = 0; i < nv; ++i)
      for (Index c = 0; c < width; ++c) w += 2 * eta * r(i, c) * m.row(i * width + c).transpose();
    DenseMatrix s = m.transpose() * m;
    s.array() -= s.minCoeff();
    return std::make_unique<QuadraticFunction>(std::move(w), std::move(s), eta * eta);
  }

  return std::make_unique<CrossEntropyProxy>(kernel, p.train_dz, f, p.val_labels, eta);
}

double cross_entropy_beta_bound(const SelectionProblem& problem, double eta) {
  if (problem.loss != LossKind::kCrossEntropy)
    throw std::invalid_argument("cross_entropy_beta_bound: loss is not cross_entropy");
  const CrossEntropyProxy f(augmented_kernel(problem), problem.train_dz,
                            layer_logits(problem.base, problem.h_val), problem.val_labels, eta);
  return 1.0 / f.g_prime_max();
}

std::shared_ptr<const SetFunction> candidate_regularizer(const Dataset& train, Regularizer r) {
  switch (r) {
    case Regularizer::kFacilityLocation:
      return std::make_shared<const FacilityLocation>(FacilityLocation::from_features(
          train.features, train.labels, train.features, train.labels, true));
    case Regularizer::kDispersion:
      return std::make_shared<const DispersionFunction>(train.features);
    case Regularizer::kNone:
    case Regularizer::kRandom:
      break;
  }
  return nullptr;
}

namespace {

// Best-first by (score desc, index asc).
struct ScoreOrder {
  const Vector& score;
  bool operator()(Index a, Index b) const {
    if (score(a) != score(b)) return score(a) > score(b);
    return a < b;
  }
};

// Picks m of `remaining` using stale scores; returns positions in pick order.
std::vector<Index> pick_round(std::vector<Index>& remaining, const Vector& score, Index m,
                              const GlisterConfig& cfg, Index n, SeededRng& rng) {
  std::vector<Index> picks;
  const ScoreOrder order{score};
  switch (cfg.greedy) {
    case GreedyKind::kNaive:
    case GreedyKind::kLazy: {
      std::partial_sort(remaining.begin(), remaining.begin() + m, remaining.end(), order);
      picks.assign(remaining.begin(), remaining.begin() + m);
      remaining.erase(remaining.begin(), remaining.begin() + m);
      std::sort(remaining.begin(), remaining.end());
      break;
    }
    case GreedyKind::kStochastic: {
      const auto sample = static_cast<Index>(std::ceil(
          static_cast<double>(n) / static_cast<double>(cfg.k) * std::log(1.0 / cfg.epsilon)));
      for (Index t = 0; t < m; ++t) {
        const Index s = std::clamp<Index>(sample, 1, static_cast<Index>(remaining.size()));
        Index best = -1;
        for (Index pos : rng.sample_without_replacement(static_cast<Index>(remaining.size()), s))
          if (best < 0 || order(remaining[static_cast<std::size_t>(pos)],
                                remaining[static_cast<std::size_t>(best)]))
            best = pos;
        picks.push_back(remaining[static_cast<std::size_t>(best)]);
        remaining.erase(remaining.begin() + best);
      }
      break;
    }
    case GreedyKind::kRandomized: {
      for (Index t = 0; t < m; ++t) {
        const Index top = std::min<Index>(cfg.k, static_cast<Index>(remaining.size()));
        std::partial_sort(remaining.begin(), remaining.begin() + top, remaining.end(), order);
        const auto pos = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(top)));
        picks.push_back(remaining[static_cast<std::size_t>(pos)]);
        remaining.erase(remaining.begin() + pos);
        std::sort(remaining.begin(), remaining.end());
      }
      break;
    }
  }
  return picks;
}

}  // namespace

GreedyDssResult greedy_dss(const SelectionProblem& problem, const GlisterConfig& cfg,
                           SeededRng& rng, const SetFunction* regularizer) {
  const Index n = problem.size();
  cfg.validate(n);
  const bool additive = cfg.regularizer == Regularizer::kFacilityLocation ||
                        cfg.regularizer == Regularizer::kDispersion;
  if (additive && (regularizer == nullptr || regularizer->size() != n))
    throw std::invalid_argument("greedy_dss: regularizer needs a ground set of n");

  Index k_gain = cfg.k;
  Index rounds = cfg.rounds;
  if (cfg.regularizer == Regularizer::kRandom) {
    k_gain = std::clamp<Index>(std::llround(cfg.lambda * static_cast<double>(cfg.k)), 0, cfg.k);
    rounds = std::min(rounds, std::max<Index>(k_gain, 1));
  }
  const Index base = k_gain / rounds;
  if (k_gain > 0 && base == 0) throw std::invalid_argument("r too large for k");

  GreedyDssResult out;
  GainState state(problem, cfg.eta);
  std::unique_ptr<SetFunction::State> reg_state;
  if (additive) reg_state = regularizer->start();

  std::vector<Index> remaining(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) remaining[static_cast<std::size_t>(i)] = i;

  for (Index round = 0; k_gain > 0 && round < rounds; ++round) {
    const Index m = round + 1 == rounds ? k_gain - base * (rounds - 1) : base;
    if (state.stale()) state.refresh();
    Vector score = state.taylor_gains();
    if (additive && cfg.lambda != 0) {
      parallel_for(n, [&](Index begin, Index end) {
        for (Index e = begin; e < end; ++e) score(e) += cfg.lambda * reg_state->gain(e);
      });
    }
    for (Index e : pick_round(remaining, score, m, cfg, n, rng)) {
      out.selection.push_back(e);
      out.scores.push_back(score(e));
      state.fold(e);
      if (reg_state) reg_state->add(e);
    }
  }

  const Index random_count = cfg.k - k_gain;
  if (random_count > 0) {
    for (Index pos :
         rng.sample_without_replacement(static_cast<Index>(remaining.size()), random_count)) {
      out.selection.push_back(remaining[static_cast<std::size_t>(pos)]);
      out.scores.push_back(0.0);
    }
  }
  out.refreshes = state.refresh_count();
  out.theta_lookahead = state.theta_lookahead();
  return out;
}

std::vector<Index> greedy_dss(const Dataset& train, const Dataset& val, const ModelParams& params,
                              const GlisterConfig& cfg, SeededRng& rng) {
  const SelectionProblem problem = SelectionProblem::build(params, train.features, train.labels,
                                                           val.features, val.labels, cfg.loss);
  const auto reg = candidate_regularizer(train, cfg.regularizer);
  return greedy_dss(problem, cfg, rng, reg.get()).selection;
}

// Training loop -------------------------------------------------------------

const char* RunTrace::csv_header() {
  return "epoch,wall_s,sel_s,train_loss,full_train_loss,val_loss,test_acc,subset_digest,"
         "dot_vt,cos_theta,grad_norm_t,lr_bound";
}

std::string RunTrace::to_csv() const {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const EpochRecord& r : epochs) {
    os << r.epoch << ',' << format_double(r.wall_s) << ',' << format_double(r.sel_s) << ','
       << format_double(r.train_loss) << ',' << format_double(r.full_train_loss) << ','
       << format_double(r.val_loss) << ',' << format_double(r.test_acc) << ','
       << r.subset_digest << ',';
    if (r.monitor) {
      const MonitorRecord& m = *r.monitor;
      os << format_double(m.dot_vt) << ',' << format_double(m.cos_theta) << ','
         << format_double(m.grad_norm_t) << ',' << format_double(m.lr_bound);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  return os.str();
}

void RunTrace::finalize() {
  sigma_t = 0;
  for (const EpochRecord& r : epochs)
    if (r.monitor) sigma_t = std::max(sigma_t, r.monitor->grad_norm_t);
  const double denom = smoothness * sigma_t;
  for (EpochRecord& r : epochs) {
    if (!r.monitor) continue;
    const double num = 2 * r.monitor->grad_norm_v * r.monitor->cos_theta;
    if (denom > 0) {
      r.monitor->lr_bound = num / denom;
    } else {
      r.monitor->lr_bound = num > 0    ? std::numeric_limits<double>::infinity()
                            : num < 0 ? -std::numeric_limits<double>::infinity()
                                      : 0.0;
    }
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_subset(const std::vector<Index>& subset, Index n) {
  if (subset.empty()) throw std::runtime_error("selector returned an empty subset");
  std::vector<Index> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || sorted.back() >= n)
    throw std::runtime_error("selector returned an index out of range");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::runtime_error("selector returned a repeated index");
}

}  // namespace

RunResult train_with_selection(const Dataset& train, const Dataset& val, const Dataset& test,
                               const TrainConfig& tc, Index select_every, const Selector& select) {
  if (tc.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (select_every < 1) throw std::invalid_argument("train: select_every must be >= 1");
  if (train.size() < 1 || val.size() < 1 || test.size() < 1)
    throw std::invalid_argument("train: empty dataset");

  const SeededRng root(tc.seed);
  SeededRng init_rng = root.split(0);
  SeededRng sgd_rng = root.split(1);
  SeededRng sel_rng = root.split(2);

  RunResult out;
  out.params = init_params(tc.model, init_rng);
  out.trace.lr = tc.sgd.lr;
  const LossKind loss = tc.sgd.loss;

  double val_loss = loss_value(out.params, val.features, val.labels, loss);
  Vector theta = out.params.flatten();
  Vector val_grad;
  if (tc.monitors) val_grad = grad_full(out.params, val.features, val.labels, loss).flatten();

  double wall = 0, sel = 0;
  Dataset subset_data;
  for (Index t = 0; t < tc.epochs; ++t) {
    EpochRecord rec;
    rec.epoch = t;
    if (t % select_every == 0) {
      const auto start = Clock::now();
      out.subset = select(out.params, t, sel_rng);
      const double dt = seconds_since(start);
      sel += dt;
      wall += dt;
      check_subset(out.subset, train.size());
      subset_data = train.subset(out.subset);
      if (tc.monitors) {
        const Vector gt =
            grad_full(out.params, subset_data.features, subset_data.labels, loss).flatten();
        MonitorRecord m;
        m.dot_vt = val_grad.dot(gt);
        m.grad_norm_t = gt.norm();
        m.grad_norm_v = val_grad.norm();
        m.cos_theta = m.grad_norm_t > 0 && m.grad_norm_v > 0
                          ? m.dot_vt / (m.grad_norm_t * m.grad_norm_v)
                          : 0.0;
        m.val_loss_before = val_loss;
        m.param_norm = theta.norm();
        rec.monitor = m;
      }
    }

    const auto start = Clock::now();
    out.params = sgd_epoch(out.params, train, out.subset, tc.sgd, sgd_rng);
    wall += seconds_since(start);

    val_loss = loss_value(out.params, val.features, val.labels, loss);
    rec.wall_s = wall;
    rec.sel_s = sel;
    rec.train_loss = loss_value(out.params, subset_data.features, subset_data.labels, loss);
    rec.full_train_loss = loss_value(out.params, train.features, train.labels, loss);
    rec.val_loss = val_loss;
    rec.test_acc = accuracy(out.params, test.features, test.labels);
    rec.subset_digest = subset_digest(out.subset);

    if (tc.monitors) {
      const Vector next_theta = out.params.flatten();
      const Vector next_grad = grad_full(out.params, val.features, val.labels, loss).flatten();
      const double step = (next_theta - theta).norm();
      if (step > 0)
        out.trace.smoothness = std::max(out.trace.smoothness, (next_grad - val_grad).norm() / step);
      theta = next_theta;
      val_grad = next_grad;
    }
    out.trace.epochs.push_back(std::move(rec));
  }
  out.trace.finalize();
  return out;
}

RunResult glister_online_train(const Dataset& train, const Dataset& val, const Dataset& test,
                               const TrainConfig& tc, const GlisterConfig& cfg) {
  cfg.validate(train.size());
  const auto reg = candidate_regularizer(train, cfg.regularizer);
  const Selector select = [&](const ModelParams& params, Index, SeededRng& rng) {
    const SelectionProblem problem = SelectionProblem::build(
        params, train.features, train.labels, val.features, val.labels, cfg.loss);
    return greedy_dss(problem, cfg, rng, reg.get()).selection;
  };
  return train_with_selection(train, val, test, tc, cfg.select_every, select);
}

DescentReport monitor_descent(const RunTrace& trace, double tolerance) {
  DescentReport rep;
  rep.smoothness = trace.smoothness;
  rep.sigma_t = trace.sigma_t;
  for (const EpochRecord& r : trace.epochs) {
    if (!r.monitor) continue;
    DescentRow row;
    row.epoch = r.epoch;
    row.dot_nonnegative = r.monitor->dot_vt >= 0;
    row.lr_within_bound = trace.lr <= r.monitor->lr_bound;
    row.val_rose = r.val_loss > r.monitor->val_loss_before + tolerance;
    const bool held = row.dot_nonnegative && row.lr_within_bound;
    row.violation = held && row.val_rose;
    rep.conditions_held += held ? 1 : 0;
    rep.violations += row.violation ? 1 : 0;
    rep.rows.push_back(row);
  }
  return rep;
}

ConvergenceReport monitor_convergence(const RunTrace& trace) {
  ConvergenceReport rep;
  rep.epochs = static_cast<Index>(trace.epochs.size());
  double max_param = 0, min_grad = std::numeric_limits<double>::infinity(), max_grad = 0;
  double min_selected = std::numeric_limits<double>::infinity();
  double min_all = min_selected;
  double root_sum = 0;
  for (const EpochRecord& r : trace.epochs) {
    min_all = std::min(min_all, r.val_loss);
    if (!r.monitor) continue;
    const MonitorRecord& m = *r.monitor;
    max_param = std::max(max_param, m.param_norm);
    min_grad = std::min(min_grad, m.grad_norm_t);
    max_grad = std::max(max_grad, m.grad_norm_t);
    min_selected = std::min(min_selected, m.val_loss_before);
    min_all = std::min(min_all, m.val_loss_before);
    rep.cos_theta.push_back(m.cos_theta);
    root_sum += std::sqrt(std::max(0.0, 1 - m.cos_theta));
  }
  if (rep.cos_theta.empty()) return rep;
  rep.r = 2 * max_param;
  rep.sigma_t = max_grad;
  rep.delta_min = max_grad > 0 ? min_grad / max_grad : 0.0;
  const double scale = rep.r * rep.sigma_t;
  const double mean_root = root_sum / static_cast<double>(rep.cos_theta.size());
  if (scale == 0) {
    rep.first_term = rep.second_term = 0;
  } else if (rep.delta_min == 0) {
    rep.first_term = std::numeric_limits<double>::infinity();
    rep.second_term = mean_root > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    rep.first_term = scale / (rep.delta_min * std::sqrt(static_cast<double>(rep.epochs)));
    rep.second_term = scale * mean_root / rep.delta_min;
  }
  rep.bound = rep.first_term + rep.second_term;
  rep.gap = min_selected - min_all;
  return rep;
}

}  // namespace glister
