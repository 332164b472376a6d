#include "glister/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace glister {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

// Stamps timing and applies the runtime bound.
CriterionResult finish(CriterionResult r, Clock::time_point start) {
  r.seconds = seconds_since(start);
  if (r.time_limit_s > 0 && r.seconds > r.time_limit_s) {
    r.pass = false;
    r.detail += "; over time limit " + fmt("%.0f s", r.time_limit_s);
  }
  return r;
}

DenseMatrix normal_matrix(Index r, Index c, SeededRng& rng) {
  DenseMatrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

std::vector<Index> iota_vec(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Central differences are only valid away from ReLU and hinge corners.
bool away_from_kinks(const ModelParams& p, const DenseMatrix& x, std::span<const int> y,
                     LossKind kind, double gap) {
  if (p.layers.size() > 1) {
    DenseMatrix pre = x * p.layers[0].weight.transpose();
    pre.rowwise() += p.layers[0].bias.transpose();
    if (pre.cwiseAbs().minCoeff() < gap) return false;
  }
  if (kind == LossKind::kHinge || kind == LossKind::kPerceptron) {
    const DenseMatrix f = forward(p, x);
    const double kink = kind == LossKind::kHinge ? 1.0 : 0.0;
    for (Index i = 0; i < f.rows(); ++i) {
      const double m = (y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0) * f(i, 0);
      if (std::abs(m - kink) < gap) return false;
    }
  }
  return true;
}

struct Split3 {
  Dataset train, val, test;
};

// Train, validation and test drawn independently from the same layout.
Split3 blobs(SyntheticKind kind, Index train_pc, Index val_pc, Index test_pc, std::uint64_t seed) {
  return {gen_synthetic(kind, train_pc, seed * 3 + 101).data,
          gen_synthetic(kind, val_pc, seed * 3 + 102).data,
          gen_synthetic(kind, test_pc, seed * 3 + 103).data};
}

SelectionProblem make_problem(const Dataset& train, const Dataset& val, LossKind loss,
                              Index hidden, std::uint64_t seed) {
  SeededRng rng(seed);
  const ModelParams p =
      init_params({train.dim(), hidden, output_width(loss, train.num_classes)}, rng);
  return SelectionProblem::build(p, train.features, train.labels, val.features, val.labels, loss);
}

// Counts (X subset of Y, e outside Y) triples that break diminishing returns.
int diminishing_violations(const SetFunction& f, int trials, SeededRng& rng, double tol) {
  const Index n = f.size();
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    const auto perm = rng.sample_without_replacement(n, n);
    const auto big = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
    const auto small = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(big + 1)));
    const std::span<const Index> all(perm);
    const Index e = perm[static_cast<std::size_t>(big)];
    if (f.marginal(e, all.first(static_cast<std::size_t>(small))) + tol <
        f.marginal(e, all.first(static_cast<std::size_t>(big))))
      ++bad;
  }
  return bad;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

// Shallow-model protocol shared by the robustness criteria. The step is the
// default 0.05 divided by the batch size, since losses here are summed over
// the batch.
constexpr Index kHidden = 100;
constexpr double kLr = 0.05 / 20;

TrainConfig shallow_train_config(const Dataset& train, std::uint64_t seed) {
  TrainConfig tc;
  tc.model = {train.dim(), kHidden, output_width(LossKind::kCrossEntropy, train.num_classes)};
  tc.sgd.lr = kLr;
  tc.sgd.batch_size = 20;
  tc.epochs = 200;
  tc.seed = seed;
  tc.monitors = false;
  return tc;
}

GlisterConfig shallow_glister(Index k) {
  GlisterConfig g;
  g.k = k;
  g.select_every = 20;
  g.rounds = rounds_from_fraction(0.03, k);
  g.eta = kLr;
  return g;
}

double final_accuracy(const RunResult& r, const Dataset& test) {
  return accuracy(r.params, test.features, test.labels);
}

// Blanks the timing columns of a trace CSV.
std::string mask_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  std::vector<bool> masked;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header) {
      for (const auto& c : cells) masked.push_back(c == "wall_s" || c == "sel_s");
      header = false;
    } else {
      for (std::size_t i = 0; i < cells.size() && i < masked.size(); ++i)
        if (masked[i]) cells[i] = "*";
    }
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace

CriterionResult check_gradients(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{1, "gradient correctness", false, "", 0, 10};
  const LossKind losses[] = {LossKind::kCrossEntropy, LossKind::kLogistic, LossKind::kSquared,
                             LossKind::kHinge, LossKind::kPerceptron};
  SeededRng rng(seed + 1);
  int checked = 0, failed = 0;
  double worst = 0;
  for (int trial = 0; checked < 60 && trial < 2000; ++trial) {
    const LossKind kind = losses[trial % 5];
    const Index hidden = (trial / 5) % 2 == 0 ? 0 : 4;
    const int classes = is_margin_loss(kind) ? 2 : 2 + trial % 2;
    const ModelParams p = init_params({3, hidden, output_width(kind, classes)}, rng);
    const DenseMatrix x = normal_matrix(5, 3, rng);
    std::vector<int> y;
    for (int i = 0; i < 5; ++i) y.push_back(static_cast<int>(rng.uniform_int(classes)));
    if (!away_from_kinks(p, x, y, kind, 1e-4)) continue;
    const Vector analytic = grad_full(p, x, y, kind).flatten();
    const Vector numeric = finite_diff_grad(
        [&](const Vector& v) { return loss_value(p.with_values(v), x, y, kind); }, p.flatten(),
        1e-6);
    const double err = relative_error(analytic, numeric);
    worst = std::max(worst, err);
    if (!(err <= 1e-5)) ++failed;
    ++checked;
  }
  r.pass = checked >= 50 && failed == 0;
  r.detail = std::to_string(checked) + " cases, max rel err " + fmt("%.2e", worst);
  return finish(r, start);
}

CriterionResult check_submodularity(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{2, "taylor proxy submodularity", true, "", 0, 30};
  std::ostringstream detail;
  for (LossKind loss : {LossKind::kLogistic, LossKind::kHinge, LossKind::kPerceptron}) {
    const Split3 d = blobs(SyntheticKind::kSeparable2, 30, 20, 2, seed + 7);
    const SelectionProblem p = make_problem(d.train, d.val, loss, 8, seed + 8);
    const auto proxy = taylor_proxy(p, 0.5, 10);
    SeededRng rng(seed + 9);
    const int bad = diminishing_violations(*proxy, 200, rng, 1e-9);
    if (bad > 0 || !proxy->monotone()) r.pass = false;
    detail << to_string(loss) << " n=" << p.size() << " bad=" << bad << "/200; ";
  }
  {
    const Split3 d = blobs(SyntheticKind::kSeparable2, 5, 10, 2, seed + 10);
    const SelectionProblem p = make_problem(d.train, d.val, LossKind::kSquared, 8, seed + 11);
    const auto proxy = taylor_proxy(p, 0.5, 4);
    int bad = 0, negative = 0;
    for (Index e = 0; e < p.size(); ++e) {
      const double alone = proxy->marginal(e, {});
      for (Index j = 0; j < p.size(); ++j) {
        if (j == e) continue;
        const std::vector<Index> sj = {j};
        const double after = proxy->marginal(e, sj);
        if (after > alone + 1e-9) ++bad;
        if (after < 0) ++negative;
      }
    }
    // A quadratic set function is submodular iff every pairwise interaction
    // is non-positive, which the table above covers.
    const bool non_monotone = !proxy->monotone();
    if (bad > 0 || !non_monotone) r.pass = false;
    detail << "squared n=" << p.size() << " table bad=" << bad << " negative marginals=" << negative
           << (non_monotone ? " non-monotone" : " monotone");
  }
  r.detail = detail.str();
  return finish(r, start);
}

CriterionResult check_greedy_ratio(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{3, "greedy approximation ratio", true, "", 0, 60};
  const double bound = 1 - 1 / std::exp(1.0);
  double worst = 1e300;
  int mismatched = 0;
  auto check = [&](const SetFunction& f) {
    const double empty = f.value(std::span<const Index>{});
    const GreedyResult naive = naive_greedy(f, 4);
    const GreedyResult lazy = lazy_greedy(f, 4);
    if (naive.selection != lazy.selection) ++mismatched;
    const double opt = exhaustive_max(f, 4).value - empty;
    const double ratio = opt > 0 ? (naive.value - empty) / opt : 1.0;
    worst = std::min(worst, ratio);
  };
  for (int i = 0; i < 25; ++i) {
    SeededRng rng(seed * 1000 + 200 + static_cast<std::uint64_t>(i));
    const DenseMatrix pts = normal_matrix(12, 2, rng);
    const std::vector<int> one_class(12, 0);
    check(facility_location(pts, one_class, false));
  }
  for (int i = 0; i < 25; ++i) {
    const Split3 d = blobs(SyntheticKind::kSeparable2, 6, 10, 2, seed * 1000 + 300 + i);
    const SelectionProblem p =
        make_problem(d.train, d.val, LossKind::kLogistic, 8, seed * 1000 + 400 + i);
    check(*taylor_proxy(p, 0.5, 4));
  }
  // Randomized greedy on a positive LR-submodular instance.
  SeededRng gen(seed + 8);
  auto regression = [&](Index n, double scale) {
    RegressionData out{normal_matrix(n, 3, gen), Vector(n)};
    for (Index i = 0; i < n; ++i) out.y[i] = scale * (out.x.row(i).sum() + 0.3 * gen.normal());
    return out;
  };
  const RegressionData train = regression(10, 0.05);
  const RegressionData val = regression(15, 1.0);
  const QuadraticFunction lr = lr_submodular(train, val, 10, seed + 1);
  const double empty = lr.value(std::span<const Index>{});
  const double opt = exhaustive_max(lr, 4).value - empty;
  double mean = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    SeededRng rng(seed * 100 + s);
    mean += (randomized_greedy(lr, 4, rng).value - empty) / 50;
  }
  const double rand_ratio = opt > 0 ? mean / opt : 0;
  r.pass = worst >= bound - 1e-12 && mismatched == 0 && opt > 0 && rand_ratio >= 1 / std::exp(1.0);
  r.detail = "50 instances, min ratio " + fmt("%.4f", worst) + ", lazy mismatches " +
             std::to_string(mismatched) + ", randomized mean ratio " + fmt("%.4f", rand_ratio);
  return finish(r, start);
}

CriterionResult check_taylor_fidelity(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{4, "taylor fidelity", false, "", 0, 30};
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Split3 d = blobs(SyntheticKind::kSeparable2, 100, 30, 2, seed * 1000 + 500 + trial);
    const SelectionProblem p =
        make_problem(d.train, d.val, LossKind::kCrossEntropy, 8, seed * 1000 + 600 + trial);
    const GainState s(p, 0.01);
    const Vector tg = s.taylor_gains();
    Index best_t = 0, best_e = 0;
    double best_exact = -1e300;
    for (Index e = 0; e < p.size(); ++e) {
      if (tg(e) > tg(best_t)) best_t = e;
      const double g = exact_gain(p, {}, e, 0.01);
      if (g > best_exact) best_exact = g, best_e = e;
    }
    agree += best_t == best_e ? 1 : 0;
  }
  double min_slope = 1e300;
  for (LossKind loss : {LossKind::kCrossEntropy, LossKind::kLogistic, LossKind::kSquared}) {
    const Split3 d = blobs(SyntheticKind::kSeparable2, 20, 20, 2, seed + 700);
    const SelectionProblem p = make_problem(d.train, d.val, loss, 8, seed + 701);
    const std::vector<Index> s = {1, 4};
    std::vector<double> xs, ys;
    for (double eta : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
      GainState st(p, eta);
      for (Index e : s) st.fold(e);
      st.refresh();
      double err = 0;
      for (Index e = 5; e < 15; ++e) err += std::abs(exact_gain(p, s, e, eta) - st.taylor_gain(e));
      xs.push_back(std::log(eta));
      ys.push_back(std::log(err));
    }
    min_slope = std::min(min_slope, loglog_slope(xs, ys));
  }
  r.pass = agree >= 80 && min_slope >= 1.7;
  r.detail = "top-1 agreement " + std::to_string(agree) + "/100, min error slope " +
             fmt("%.3f", min_slope);
  return finish(r, start);
}

CriterionResult check_label_noise(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{5, "label noise robustness", false, "", 0, 300};
  const double rate = 0.3;
  double acc_g = 0, acc_r = 0, flipped = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::uint64_t base = seed * 100 + s;
    Split3 d = blobs(SyntheticKind::kSeparable2, 500, 50, 250, base + 5000);
    d.train = inject_label_noise(d.train, rate, base + 6000);
    const TrainConfig tc = shallow_train_config(d.train, base);
    StrategyConfig cfg;
    cfg.glister = shallow_glister(static_cast<Index>(std::llround(0.3 * d.train.size())));
    cfg.glister.regularizer = Regularizer::kRandom;
    cfg.glister.lambda = 0.9;
    cfg.strategy = Strategy::kGlister;
    const RunResult g = run_strategy(d.train, d.val, d.test, tc, cfg);
    cfg.strategy = Strategy::kRandom;
    const RunResult rnd = run_strategy(d.train, d.val, d.test, tc, cfg);
    acc_g += final_accuracy(g, d.test) / 5;
    acc_r += final_accuracy(rnd, d.test) / 5;
    Index bad = 0;
    for (Index i : g.subset) bad += d.train.noise_flipped[static_cast<std::size_t>(i)] ? 1 : 0;
    flipped += static_cast<double>(bad) / static_cast<double>(g.subset.size()) / 5;
  }
  r.pass = acc_g >= acc_r + 0.05 && flipped <= 0.5 * rate;
  r.detail = "glister " + fmt("%.4f", acc_g) + " vs random " + fmt("%.4f", acc_r) +
             " (need +0.05); flipped in subset " + fmt("%.3f", flipped) + " (need <= 0.15)";
  return finish(r, start);
}

CriterionResult check_class_imbalance(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{6, "class imbalance", false, "", 0, 300};
  double acc_g = 0, acc_r = 0, sub_frac = 0, pool_frac = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::uint64_t base = seed * 100 + s;
    Split3 d = blobs(SyntheticKind::kOverlapping4, 250, 25, 250, base + 7000);
    const std::uint64_t imb_seed = base + 8000;
    d.train = inject_class_imbalance(d.train, 0.3, 0.1, imb_seed);
    const auto rare = imbalance_affected_classes(4, 0.3, imb_seed);
    auto is_rare = [&](Index i) {
      const int c = d.train.labels[static_cast<std::size_t>(i)];
      return std::find(rare.begin(), rare.end(), c) != rare.end();
    };
    const TrainConfig tc = shallow_train_config(d.train, base);
    StrategyConfig cfg;
    // 10% keeps the balanced random baseline feasible: each rare class has 25 rows.
    cfg.glister = shallow_glister(static_cast<Index>(std::llround(0.1 * d.train.size())));
    cfg.strategy = Strategy::kGlister;
    const RunResult g = run_strategy(d.train, d.val, d.test, tc, cfg);
    cfg.strategy = Strategy::kRandomPrior;
    const RunResult rnd = run_strategy(d.train, d.val, d.test, tc, cfg);
    acc_g += final_accuracy(g, d.test) / 5;
    acc_r += final_accuracy(rnd, d.test) / 5;
    Index in_subset = 0, in_pool = 0;
    for (Index i : g.subset) in_subset += is_rare(i) ? 1 : 0;
    for (Index i = 0; i < d.train.size(); ++i) in_pool += is_rare(i) ? 1 : 0;
    sub_frac += static_cast<double>(in_subset) / static_cast<double>(g.subset.size()) / 5;
    pool_frac += static_cast<double>(in_pool) / static_cast<double>(d.train.size()) / 5;
  }
  r.pass = sub_frac >= 2 * pool_frac && acc_g >= acc_r + 0.03;
  r.detail = "rare fraction subset " + fmt("%.3f", sub_frac) + " vs pool " +
             fmt("%.3f", pool_frac) + "; glister " + fmt("%.4f", acc_g) +
             " vs proportional random " + fmt("%.4f", acc_r) + " (need +0.03)";
  return finish(r, start);
}

CriterionResult check_active_learning(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{7, "active learning", false, "", 0, 600};
  double acc_g = 0, acc_r = 0;
  Index tainted = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::uint64_t base = seed * 100 + s;
    const Split3 d = blobs(SyntheticKind::kSeparable2, 500, 50, 250, base + 9000);
    ActiveConfig cfg;
    cfg.initial_labeled = 20;
    cfg.batch = 50;
    cfg.rounds = 10;
    cfg.epochs_per_round = 200;
    cfg.model = {d.train.dim(), kHidden, 2};
    cfg.sgd.lr = kLr;
    cfg.glister = shallow_glister(cfg.batch);
    cfg.seed = base;
    cfg.acquisition = Acquisition::kGlister;
    const ActiveResult g = run_active(d.train, d.val, d.test, cfg);
    cfg.acquisition = Acquisition::kRandom;
    const ActiveResult rnd = run_active(d.train, d.val, d.test, cfg);
    acc_g += g.trace.back().test_acc / 5;
    acc_r += rnd.trace.back().test_acc / 5;
    tainted += g.tainted_reads + rnd.tainted_reads;
  }
  r.pass = acc_g >= acc_r + 0.02 && tainted == 0;
  r.detail = "glister-active " + fmt("%.4f", acc_g) + " vs random " + fmt("%.4f", acc_r) +
             " (need +0.02); tainted reads " + std::to_string(tainted);
  return finish(r, start);
}

CriterionResult check_descent_monitor(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{8, "validation descent monitor", false, "", 0, 0};
  Index violations = 0, held = 0, rows = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::uint64_t base = seed * 100 + s;
    const Split3 d = blobs(SyntheticKind::kSeparable2, 200, 50, 100, base + 11000);
    TrainConfig tc = shallow_train_config(d.train, base);
    tc.sgd.lr = 0.005;
    tc.monitors = true;
    GlisterConfig g = shallow_glister(static_cast<Index>(std::llround(0.3 * d.train.size())));
    g.eta = tc.sgd.lr;
    const RunResult run = glister_online_train(d.train, d.val, d.test, tc, g);
    const DescentReport rep = monitor_descent(run.trace, 1e-7);
    violations += rep.violations;
    held += rep.conditions_held;
    rows += static_cast<Index>(rep.rows.size());
  }
  r.pass = violations == 0;
  r.detail = std::to_string(rows) + " selection epochs, conditions held " + std::to_string(held) +
             ", violations " + std::to_string(violations) +
             (held == 0 ? " (vacuous: both conditions never held together)" : "");
  return finish(r, start);
}

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.n < 2 || cfg.d < 1 || cfg.k < 1 || cfg.k > cfg.n || cfg.val_size < 1 ||
      cfg.train_repeats < 1 || !(cfg.r_frac > 0))
    throw std::invalid_argument("run_bench: bad sizes");
  const Dataset all = gen_gaussian_classes(cfg.n + cfg.val_size, cfg.d, 2, 1.0, cfg.seed);
  auto [train, val] = split_off(
      all, static_cast<double>(cfg.val_size) / static_cast<double>(all.size()), cfg.seed + 1);
  SeededRng root(cfg.seed);
  SeededRng init = root.split(0);
  const ModelParams params = init_params({cfg.d, cfg.hidden, 2}, init);

  BenchResult out;
  out.n = train.size();
  out.d = cfg.d;
  out.k = std::min(cfg.k, train.size());
  out.r = rounds_from_fraction(cfg.r_frac, out.k);

  auto time_selection = [&](Index rounds) {
    GlisterConfig g;
    g.k = out.k;
    g.rounds = rounds;
    g.eta = 0.05;
    SeededRng rng = root.split(2);
    const auto t0 = Clock::now();
    const SelectionProblem p = SelectionProblem::build(params, train.features, train.labels,
                                                       val.features, val.labels, g.loss);
    greedy_dss(p, g, rng);
    return seconds_since(t0);
  };
  out.sel_s = time_selection(out.r);
  out.sel_full_r_s = time_selection(out.k);

  SgdOptions sgd;
  SeededRng pick = root.split(3);
  const std::vector<Index> subset = pick.sample_without_replacement(train.size(), out.k);
  const std::vector<Index> everything = iota_vec(train.size());
  auto time_epoch = [&](const std::vector<Index>& rows) {
    SeededRng rng = root.split(1);
    double best = 1e300;
    for (Index t = 0; t < cfg.train_repeats; ++t) {
      const auto t0 = Clock::now();
      const ModelParams next = sgd_epoch(params, train, rows, sgd, rng);
      best = std::min(best, seconds_since(t0));
      if (next.layers.empty()) throw std::logic_error("run_bench: empty model");
    }
    return best;
  };
  out.train_s = time_epoch(subset);
  out.train_full_s = time_epoch(everything);
  return out;
}

CriterionResult check_efficiency(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{9, "efficiency", false, "", 0, 0};
  BenchConfig cfg;
  cfg.seed = seed;
  cfg.r_frac = 0.03;
  const BenchResult b = run_bench(cfg);
  const double sel_speedup = b.sel_full_r_s / b.sel_s;
  const double train_speedup = b.train_full_s / b.train_s;
  r.pass = sel_speedup >= 5 && train_speedup >= 5;
  r.detail = "r=" + std::to_string(b.r) + " vs r=k selection " + fmt("%.1fx", sel_speedup) +
             ", 10% subset epoch " + fmt("%.1fx", train_speedup) + " (need 5x each)";
  return finish(r, start);
}

CriterionResult check_determinism(std::uint64_t seed) {
  const auto start = Clock::now();
  CriterionResult r{10, "determinism", true, "", 0, 0};
  const Split3 d = blobs(SyntheticKind::kSeparable2, 100, 30, 50, seed + 13000);
  TrainConfig tc = shallow_train_config(d.train, seed);
  tc.epochs = 40;
  tc.monitors = true;
  std::ostringstream detail;
  for (Strategy s : {Strategy::kGlister, Strategy::kRandom, Strategy::kCraig}) {
    StrategyConfig cfg;
    cfg.strategy = s;
    cfg.glister = shallow_glister(60);
    cfg.glister.select_every = 10;
    const RunResult a = run_strategy(d.train, d.val, d.test, tc, cfg);
    const RunResult b = run_strategy(d.train, d.val, d.test, tc, cfg);
    const bool same = mask_timing(a.trace.to_csv()) == mask_timing(b.trace.to_csv()) &&
                      subset_digest(a.subset) == subset_digest(b.subset);
    r.pass = r.pass && same;
    detail << to_string(s) << (same ? " identical; " : " DIFFERS; ");
  }
  ActiveConfig ac;
  ac.initial_labeled = 10;
  ac.batch = 10;
  ac.rounds = 3;
  ac.epochs_per_round = 10;
  ac.model = {2, 20, 2};
  ac.seed = seed;
  const bool same_active = run_active(d.train, d.val, d.test, ac).to_csv() ==
                           run_active(d.train, d.val, d.test, ac).to_csv();
  r.pass = r.pass && same_active;
  detail << "active " << (same_active ? "identical" : "DIFFERS");
  r.detail = detail.str();
  return finish(r, start);
}

const std::vector<std::string_view>& suite_names() {
  static const std::vector<std::string_view> names = {
      "gradients", "submodularity", "greedy-ratio", "taylor-fidelity",
      "robustness", "determinism", "all"};
  return names;
}

std::vector<CriterionResult> run_suite(std::string_view suite, std::uint64_t seed) {
  if (suite == "gradients") return {check_gradients(seed)};
  if (suite == "submodularity") return {check_submodularity(seed)};
  if (suite == "greedy-ratio") return {check_greedy_ratio(seed)};
  if (suite == "taylor-fidelity") return {check_taylor_fidelity(seed)};
  if (suite == "robustness")
    return {check_label_noise(seed), check_class_imbalance(seed), check_active_learning(seed)};
  if (suite == "determinism") return {check_determinism(seed)};
  if (suite == "all")
    return {check_gradients(seed),       check_submodularity(seed),   check_greedy_ratio(seed),
            check_taylor_fidelity(seed), check_label_noise(seed),     check_class_imbalance(seed),
            check_active_learning(seed), check_descent_monitor(seed),        check_efficiency(seed),
            check_determinism(seed)};
  throw std::invalid_argument("unknown suite: " + std::string(suite));
}

std::string format_results(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const CriterionResult& r : results) {
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %2d %-28s %8.2fs  ", r.pass ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.seconds);
    os << head << r.detail << '\n';
  }
  return os.str();
}

}  // namespace glister
