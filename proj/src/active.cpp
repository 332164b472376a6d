#include "glister/active.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace glister {

LabelOracle::LabelOracle(std::vector<int> truth, std::span<const Index> revealed)
    : truth_(std::move(truth)), revealed_(truth_.size(), 0) {
  reveal(revealed);
}

bool LabelOracle::revealed(Index i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("LabelOracle: index out of range");
  return revealed_[static_cast<std::size_t>(i)] != 0;
}

int LabelOracle::label(Index i) const {
  if (!revealed(i)) {
    ++tainted_reads_;
    throw std::logic_error("LabelOracle: label read before reveal");
  }
  return truth_[static_cast<std::size_t>(i)];
}

void LabelOracle::reveal(std::span<const Index> idx) {
  for (Index i : idx) {
    if (i < 0 || i >= size()) throw std::out_of_range("LabelOracle: index out of range");
    revealed_[static_cast<std::size_t>(i)] = 1;
  }
}

PoolState PoolState::start(Index pool_size, std::span<const Index> initial) {
  PoolState s;
  std::vector<char> taken(static_cast<std::size_t>(pool_size), 0);
  for (Index i : initial) {
    if (i < 0 || i >= pool_size) throw std::out_of_range("PoolState: initial index out of range");
    if (taken[static_cast<std::size_t>(i)]) throw std::invalid_argument("PoolState: repeated index");
    taken[static_cast<std::size_t>(i)] = 1;
  }
  for (Index i = 0; i < pool_size; ++i)
    (taken[static_cast<std::size_t>(i)] ? s.labeled : s.unlabeled).push_back(i);
  s.initial_size = static_cast<Index>(s.labeled.size());
  return s;
}

void PoolState::acquire(std::span<const Index> batch) {
  std::vector<Index> sorted(batch.begin(), batch.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("PoolState: repeated index in batch");
  std::vector<Index> rest;
  std::set_difference(unlabeled.begin(), unlabeled.end(), sorted.begin(), sorted.end(),
                      std::back_inserter(rest));
  if (rest.size() + sorted.size() != unlabeled.size())
    throw std::invalid_argument("PoolState: batch index is not unlabeled");
  unlabeled = std::move(rest);
  std::vector<Index> grown;
  std::merge(labeled.begin(), labeled.end(), sorted.begin(), sorted.end(),
             std::back_inserter(grown));
  labeled = std::move(grown);
  batches.emplace_back(batch.begin(), batch.end());
  ++rounds;
}

void PoolState::check(Index pool_size) const {
  std::vector<Index> all = labeled;
  all.insert(all.end(), unlabeled.begin(), unlabeled.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < static_cast<Index>(all.size()); ++i)
    if (all[static_cast<std::size_t>(i)] != i)
      throw std::logic_error("PoolState: labeled and unlabeled do not partition the pool");
  if (static_cast<Index>(all.size()) != pool_size)
    throw std::logic_error("PoolState: partition size differs from the pool");
  std::vector<Index> acquired;
  for (const auto& b : batches) acquired.insert(acquired.end(), b.begin(), b.end());
  std::sort(acquired.begin(), acquired.end());
  if (std::adjacent_find(acquired.begin(), acquired.end()) != acquired.end())
    throw std::logic_error("PoolState: batches overlap");
  if (static_cast<Index>(acquired.size()) + initial_size != static_cast<Index>(labeled.size()))
    throw std::logic_error("PoolState: labeled set differs from seed set plus batches");
}

std::vector<Index> stratified_initial(std::span<const int> labels, int num_classes, Index size,
                                      SeededRng& rng) {
  const auto counts = class_counts(labels, num_classes);
  const auto quota = largest_remainder(counts, size);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  std::vector<Index> out;
  for (int c = 0; c < num_classes; ++c) {
    const auto& m = members[static_cast<std::size_t>(c)];
    for (Index pos : rng.sample_without_replacement(static_cast<Index>(m.size()),
                                                    quota[static_cast<std::size_t>(c)]))
      out.push_back(m[static_cast<std::size_t>(pos)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Acquisition parse_acquisition(std::string_view name) {
  if (name == "glister") return Acquisition::kGlister;
  if (name == "random") return Acquisition::kRandom;
  if (name == "fass") return Acquisition::kFass;
  throw std::invalid_argument("unknown acquisition: " + std::string(name));
}

std::string_view to_string(Acquisition a) {
  switch (a) {
    case Acquisition::kGlister: return "glister";
    case Acquisition::kRandom: return "random";
    case Acquisition::kFass: return "fass";
  }
  return "?";
}

std::vector<Index> random_acquire(const PoolState& state, Index b, SeededRng& rng) {
  if (b < 0 || b > static_cast<Index>(state.unlabeled.size()))
    throw std::invalid_argument("random_acquire: batch larger than the unlabeled pool");
  std::vector<Index> out;
  for (Index pos : rng.sample_without_replacement(static_cast<Index>(state.unlabeled.size()), b))
    out.push_back(state.unlabeled[static_cast<std::size_t>(pos)]);
  return out;
}

Vector predictive_entropy(const ModelParams& params, const DenseMatrix& x) {
  const DenseMatrix z = forward(params, x);
  Vector h(z.rows());
  for (Index i = 0; i < z.rows(); ++i) {
    if (z.cols() == 1) {
      const double p = sigmoid(z(i, 0));
      h(i) = (p > 0 ? -p * std::log(p) : 0.0) + (p < 1 ? -(1 - p) * std::log1p(-p) : 0.0);
      continue;
    }
    const double lse = log_sum_exp(z.row(i));
    double e = 0;
    for (Index k = 0; k < z.cols(); ++k) {
      const double lp = z(i, k) - lse;
      e -= std::exp(lp) * lp;
    }
    h(i) = e;
  }
  return h;
}

std::vector<Index> fass_acquire(const PoolState& state, const DenseMatrix& pool_features,
                                const ModelParams& params, Index b, Index filter_mult) {
  const auto n_unlabeled = static_cast<Index>(state.unlabeled.size());
  if (b < 0 || b > n_unlabeled)
    throw std::invalid_argument("fass_acquire: batch larger than the unlabeled pool");
  if (filter_mult < 1) throw std::invalid_argument("fass_acquire: filter_mult must be >= 1");
  if (b == 0) return {};
  DenseMatrix x(n_unlabeled, pool_features.cols());
  for (Index r = 0; r < n_unlabeled; ++r)
    x.row(r) = pool_features.row(state.unlabeled[static_cast<std::size_t>(r)]);
  const Vector h = predictive_entropy(params, x);

  std::vector<Index> order(static_cast<std::size_t>(n_unlabeled));
  std::iota(order.begin(), order.end(), 0);
  const Index keep = std::min(n_unlabeled, filter_mult * b);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), [&](Index a, Index c) {
    if (h(a) != h(c)) return h(a) > h(c);
    return a < c;
  });
  order.resize(static_cast<std::size_t>(keep));
  std::sort(order.begin(), order.end());

  DenseMatrix cand(keep, x.cols());
  for (Index r = 0; r < keep; ++r) cand.row(r) = x.row(order[static_cast<std::size_t>(r)]);
  const std::vector<int> hyp = hypothesized_labels(params, cand);
  const FacilityLocation f = FacilityLocation::from_features(cand, hyp, cand, hyp, true);
  std::vector<Index> out;
  for (Index pos : lazy_greedy(f, b).selection)
    out.push_back(state.unlabeled[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])]);
  return out;
}

const char* ActiveResult::csv_header() {
  return "round,labeled_count,val_loss,test_acc,batch_digest";
}

std::string ActiveResult::to_csv() const {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const ActiveRound& r : trace)
    os << r.round << ',' << r.labeled_count << ',' << format_double(r.val_loss) << ','
       << format_double(r.test_acc) << ',' << r.batch_digest << '\n';
  return os.str();
}

namespace {

Dataset labeled_data(const Dataset& pool, const PoolState& state, const LabelOracle& oracle) {
  Dataset d;
  d.features.resize(static_cast<Index>(state.labeled.size()), pool.dim());
  d.num_classes = pool.num_classes;
  for (std::size_t r = 0; r < state.labeled.size(); ++r) {
    const Index i = state.labeled[r];
    d.features.row(static_cast<Index>(r)) = pool.features.row(i);
    d.labels.push_back(oracle.label(i));
  }
  d.noise_flipped.assign(d.labels.size(), false);
  d.original_labels = d.labels;
  return d;
}

ModelParams train_epochs(ModelParams params, const Dataset& data, const SgdOptions& sgd,
                         Index epochs, SeededRng& rng) {
  std::vector<Index> all(static_cast<std::size_t>(data.size()));
  std::iota(all.begin(), all.end(), 0);
  for (Index e = 0; e < epochs; ++e) params = sgd_epoch(params, data, all, sgd, rng);
  return params;
}

}  // namespace

ActiveResult run_active(const Dataset& pool, const Dataset& val, const Dataset& test,
                        const ActiveConfig& cfg) {
  SeededRng seed_rng = SeededRng(cfg.seed).split(3);
  const auto initial = stratified_initial(pool.labels, pool.num_classes,
                                          std::min(cfg.initial_labeled, pool.size()), seed_rng);
  return run_active(pool, val, test, cfg, initial);
}

ActiveResult run_active(const Dataset& pool, const Dataset& val, const Dataset& test,
                        const ActiveConfig& cfg, std::span<const Index> initial) {
  if (cfg.rounds < 1) throw std::invalid_argument("active: rounds must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("active: batch must be >= 1");
  if (cfg.epochs_per_round < 0) throw std::invalid_argument("active: epochs must be >= 0");
  if (initial.empty()) throw std::invalid_argument("active: empty seed set");

  const SeededRng root(cfg.seed);
  SeededRng init_rng = root.split(0);
  SeededRng sgd_rng = root.split(1);
  SeededRng acq_rng = root.split(2);

  LabelOracle oracle(pool.labels, initial);
  ActiveResult out;
  out.state = PoolState::start(pool.size(), initial);
  out.params = init_params(cfg.model, init_rng);
  out.params = train_epochs(out.params, labeled_data(pool, out.state, oracle), cfg.sgd,
                            cfg.epochs_per_round, sgd_rng);

  for (Index t = 0; t < cfg.rounds; ++t) {
    if (cfg.batch > static_cast<Index>(out.state.unlabeled.size()))
      throw std::runtime_error("active: pool exhausted");
    std::vector<Index> batch;
    switch (cfg.acquisition) {
      case Acquisition::kRandom:
        batch = random_acquire(out.state, cfg.batch, acq_rng);
        break;
      case Acquisition::kFass:
        batch = fass_acquire(out.state, pool.features, out.params, cfg.batch,
                             cfg.fass_filter_mult);
        break;
      case Acquisition::kGlister: {
        DenseMatrix x(static_cast<Index>(out.state.unlabeled.size()), pool.dim());
        for (std::size_t r = 0; r < out.state.unlabeled.size(); ++r)
          x.row(static_cast<Index>(r)) = pool.features.row(out.state.unlabeled[r]);
        const std::vector<int> hyp = hypothesized_labels(out.params, x);
        GlisterConfig g = cfg.glister;
        g.k = cfg.batch;
        g.rounds = std::min(g.rounds, g.k);
        const SelectionProblem problem = SelectionProblem::build(
            out.params, x, hyp, val.features, val.labels, g.loss);
        const auto reg =
            candidate_regularizer(Dataset::from(x, hyp, pool.num_classes), g.regularizer);
        for (Index pos : greedy_dss(problem, g, acq_rng, reg.get()).selection)
          batch.push_back(out.state.unlabeled[static_cast<std::size_t>(pos)]);
        break;
      }
    }
    oracle.reveal(batch);
    out.state.acquire(batch);
    out.state.check(pool.size());

    out.params = train_epochs(out.params, labeled_data(pool, out.state, oracle), cfg.sgd,
                              cfg.epochs_per_round, sgd_rng);
    ActiveRound row;
    row.round = t;
    row.labeled_count = static_cast<Index>(out.state.labeled.size());
    row.val_loss = loss_value(out.params, val.features, val.labels, cfg.sgd.loss);
    row.test_acc = accuracy(out.params, test.features, test.labels);
    row.batch_digest = subset_digest(batch);
    out.trace.push_back(row);
  }
  out.tainted_reads = oracle.tainted_reads();
  return out;
}

}  // namespace glister
