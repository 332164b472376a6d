#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace glister::cli {

using nlohmann::json;

namespace {

// Values built in code are signed even when non-negative.
bool is_non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Typed access to one JSON object; rejects keys outside `allowed`.
class Section {
 public:
  Section(const json& j, std::string where, std::set<std::string> allowed)
      : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("", "expected an object");
    for (const auto& [key, value] : j_.items())
      if (!allowed.count(key)) fail(key, "unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_number()) fail(key, "expected a number");
    return raw(key).get<double>();
  }
  Index integer(const std::string& key, Index fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_number_integer()) fail(key, "expected an integer");
    return raw(key).get<Index>();
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    if (!is_non_negative_integer(raw(key))) fail(key, "expected a non-negative integer");
    return raw(key).get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_boolean()) fail(key, "expected true or false");
    return raw(key).get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_string()) fail(key, "expected a string");
    return raw(key).get<std::string>();
  }
  // Wraps a parse_* call so its error names the field.
  template <class F>
  auto parsed(const std::string& key, F parse) const {
    try {
      return parse(string(key, ""));
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }
  Section child(const std::string& key, std::set<std::string> allowed) const {
    return Section(raw(key), path(key), std::move(allowed));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(path(key) + ": " + msg);
  }

 private:
  std::string path(const std::string& key) const {
    if (key.empty()) return where_.empty() ? "<root>" : where_;
    return where_.empty() ? key : where_ + "." + key;
  }

  const json& j_;
  std::string where_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

double default_lambda(Regularizer r) {
  switch (r) {
    case Regularizer::kRandom: return 0.9;
    case Regularizer::kFacilityLocation: return 100.0;
    case Regularizer::kDispersion: return 1.0;
    case Regularizer::kNone: break;
  }
  return 0.0;
}

std::uint64_t name_hash(std::string_view name) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t cell_seed(std::uint64_t seed, std::string_view strategy, Index budget_index) {
  return seed ^ name_hash(strategy) ^ static_cast<std::uint64_t>(budget_index);
}

ExperimentConfig parse_config(const json& j, Mode mode, const std::filesystem::path& base_dir) {
  std::set<std::string> keys = {"schema_version", "dataset", "split",     "standardize", "model",
                                "loss",           "lr",      "batch_size", "seeds",      "corruption",
                                "output_dir",     "L",       "r",          "r_frac",     "eta",
                                "lambda",         "regularizer", "greedy", "epsilon",    "strategies"};
  if (mode == Mode::kRun)
    keys.insert({"budgets", "epochs", "monitors"});
  else
    keys.insert({"initial_labeled", "batch", "rounds", "epochs_per_round", "fass_filter_mult"});
  const Section root(j, "", keys);
  ExperimentConfig c;
  c.mode = mode;

  if (!root.has("schema_version")) root.fail("schema_version", "missing");
  if (root.integer("schema_version", 0) != kSchemaVersion)
    root.fail("schema_version", "unsupported version (expected " +
                                    std::to_string(kSchemaVersion) + ")");

  if (!root.has("dataset")) root.fail("dataset", "missing");
  {
    const Section d = root.child("dataset", {"synthetic", "n_per_class", "path", "seed"});
    if (d.has("synthetic") == d.has("path")) d.fail("", "give exactly one of synthetic or path");
    if (d.has("synthetic")) {
      c.dataset.synthetic = d.parsed("synthetic", parse_synthetic_kind);
      c.dataset.n_per_class = d.integer("n_per_class", c.dataset.n_per_class);
      if (c.dataset.n_per_class < 2) d.fail("n_per_class", "must be >= 2");
    } else {
      if (d.has("n_per_class")) d.fail("n_per_class", "only valid with synthetic");
      c.dataset.path = resolve(base_dir, d.string("path", "")).string();
    }
    c.dataset.seed = d.unsigned_integer("seed", 0);
  }
  if (root.has("split")) {
    const Section s = root.child("split", {"val_frac", "test_frac"});
    c.val_frac = s.number("val_frac", c.val_frac);
    c.test_frac = s.number("test_frac", c.test_frac);
    if (!(c.val_frac > 0 && c.test_frac > 0 && c.val_frac + c.test_frac < 1))
      s.fail("", "val_frac and test_frac must be positive with sum below 1");
  }
  c.standardize = root.boolean("standardize", c.standardize);
  if (root.has("model")) {
    const Section m = root.child("model", {"hidden"});
    c.hidden = m.integer("hidden", c.hidden);
    if (c.hidden < 0) m.fail("hidden", "must be >= 0 (0 is logistic regression)");
  }
  if (root.has("loss")) c.loss = root.parsed("loss", parse_loss_kind);
  c.lr = root.number("lr", c.lr);
  if (!(c.lr > 0)) root.fail("lr", "must be positive");
  c.batch_size = root.integer("batch_size", c.batch_size);
  if (c.batch_size < 1) root.fail("batch_size", "must be >= 1");

  if (root.has("seeds")) {
    const json& s = root.raw("seeds");
    if (!s.is_array() || s.empty()) root.fail("seeds", "expected a non-empty array");
    c.seeds.clear();
    for (const auto& v : s) {
      if (!is_non_negative_integer(v)) root.fail("seeds", "entries must be non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (root.has("corruption")) {
    const Section k = root.child("corruption", {"noise_rate", "imbalance"});
    c.noise_rate = k.number("noise_rate", 0.0);
    if (!(c.noise_rate >= 0 && c.noise_rate < 1)) k.fail("noise_rate", "must lie in [0, 1)");
    if (k.has("imbalance")) {
      const Section im = k.child("imbalance", {"class_frac", "keep_frac"});
      c.imbalance_class_frac = im.number("class_frac", 0.3);
      c.imbalance_keep_frac = im.number("keep_frac", 0.1);
      if (!(c.imbalance_class_frac > 0 && c.imbalance_class_frac <= 1))
        im.fail("class_frac", "must lie in (0, 1]");
      if (!(c.imbalance_keep_frac > 0 && c.imbalance_keep_frac <= 1))
        im.fail("keep_frac", "must lie in (0, 1]");
    }
  }
  if (!root.has("output_dir")) root.fail("output_dir", "missing");
  c.output_dir = resolve(base_dir, root.string("output_dir", ""));

  c.select_every = root.integer("L", c.select_every);
  if (c.select_every < 1) root.fail("L", "must be >= 1");
  if (root.has("r")) {
    c.rounds = root.integer("r", 1);
    if (*c.rounds < 1) root.fail("r", "must be >= 1");
  }
  c.r_frac = root.number("r_frac", c.r_frac);
  if (!(c.r_frac > 0 && c.r_frac <= 1)) root.fail("r_frac", "must lie in (0, 1]");
  if (root.has("eta")) {
    c.eta = root.number("eta", 0);
    if (!(*c.eta >= 0)) root.fail("eta", "must be >= 0");
  }
  if (root.has("regularizer")) c.regularizer = root.parsed("regularizer", parse_regularizer);
  if (root.has("lambda")) {
    c.lambda = root.number("lambda", 0);
    if (!(*c.lambda >= 0)) root.fail("lambda", "must be >= 0");
    if (c.regularizer == Regularizer::kRandom && *c.lambda > 1)
      root.fail("lambda", "must be <= 1 for the random regularizer");
  }
  if (root.has("greedy")) c.greedy = root.parsed("greedy", parse_greedy_kind);
  c.epsilon = root.number("epsilon", c.epsilon);
  if (!(c.epsilon > 0 && c.epsilon < 1)) root.fail("epsilon", "must lie in (0, 1)");

  if (root.has("strategies")) {
    const json& s = root.raw("strategies");
    if (!s.is_array() || s.empty()) root.fail("strategies", "expected a non-empty array");
    std::set<std::string> seen;
    c.strategies.clear();
    c.acquisitions.clear();
    for (const auto& v : s) {
      if (!v.is_string()) root.fail("strategies", "entries must be strings");
      const auto name = v.get<std::string>();
      if (!seen.insert(name).second) root.fail("strategies", "duplicate entry " + name);
      try {
        if (mode == Mode::kRun)
          c.strategies.push_back(parse_strategy(name));
        else
          c.acquisitions.push_back(parse_acquisition(name));
      } catch (const std::invalid_argument& e) {
        root.fail("strategies", e.what());
      }
    }
  }

  if (mode == Mode::kRun) {
    if (root.has("budgets")) {
      const json& b = root.raw("budgets");
      if (!b.is_array() || b.empty()) root.fail("budgets", "expected a non-empty array");
      c.budgets.clear();
      for (const auto& v : b) {
        if (!v.is_number()) root.fail("budgets", "entries must be numbers");
        const double f = v.get<double>();
        if (!(f > 0 && f <= 1)) root.fail("budgets", "fractions must lie in (0, 1]");
        c.budgets.push_back(f);
      }
    }
    c.epochs = root.integer("epochs", c.epochs);
    if (c.epochs < 1) root.fail("epochs", "must be >= 1");
    c.monitors = root.boolean("monitors", c.monitors);
  } else {
    c.initial_labeled = root.integer("initial_labeled", c.initial_labeled);
    if (c.initial_labeled < 1) root.fail("initial_labeled", "must be >= 1");
    c.batch = root.integer("batch", c.batch);
    if (c.batch < 1) root.fail("batch", "must be >= 1");
    c.active_rounds = root.integer("rounds", c.active_rounds);
    if (c.active_rounds < 1) root.fail("rounds", "must be >= 1");
    c.epochs_per_round = root.integer("epochs_per_round", c.epochs_per_round);
    if (c.epochs_per_round < 0) root.fail("epochs_per_round", "must be >= 0");
    c.fass_filter_mult = root.integer("fass_filter_mult", c.fass_filter_mult);
    if (c.fass_filter_mult < 1) root.fail("fass_filter_mult", "must be >= 1");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, Mode mode) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_config(j, mode, file.parent_path());
}

PreparedData prepare_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  const SeededRng root = SeededRng(cfg.dataset.seed).split(seed);
  const auto sub = [&root](std::uint64_t stream) { return root.split(stream).uniform_int(~0ULL); };

  Dataset all;
  std::optional<Dataset> companion;
  if (cfg.dataset.synthetic) {
    SyntheticData g = gen_synthetic(*cfg.dataset.synthetic, cfg.dataset.n_per_class, sub(0));
    all = std::move(g.data);
    companion = std::move(g.shifted_validation);
  } else {
    std::ifstream in(cfg.dataset.path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read dataset " + cfg.dataset.path);
    std::ostringstream text;
    text << in.rdbuf();
    all = parse_libsvm(text.str());
  }

  PreparedData out;
  SplitSpec spec;
  spec.val_frac = cfg.val_frac;
  spec.test_frac = cfg.test_frac;
  spec.train_frac = 1.0 - cfg.val_frac - cfg.test_frac;
  spec.seed = sub(1);
  Splits s = split(all, spec);
  out.train = std::move(s.train);
  out.test = std::move(s.test);
  // Shifted kinds validate on the translated companion set.
  out.val = companion ? split_off(*companion, cfg.val_frac, sub(2)).second : std::move(s.val);

  if (cfg.imbalance_class_frac > 0)
    out.train = inject_class_imbalance(out.train, cfg.imbalance_class_frac,
                                       cfg.imbalance_keep_frac, sub(3));
  if (cfg.noise_rate > 0) out.train = inject_label_noise(out.train, cfg.noise_rate, sub(4));

  if (cfg.standardize) {
    const Standardizer z = Standardizer::fit(out.train);
    out.train = z.apply(out.train);
    out.val = z.apply(out.val);
    out.test = z.apply(out.test);
  }
  out.max_row_norm = max_row_norm(out.train.features);
  return out;
}

GlisterConfig glister_config(const ExperimentConfig& cfg, Index k) {
  GlisterConfig g;
  g.k = k;
  g.select_every = cfg.select_every;
  g.rounds = cfg.rounds ? std::min(*cfg.rounds, k) : rounds_from_fraction(cfg.r_frac, k);
  g.eta = cfg.eta.value_or(cfg.lr);
  g.regularizer = cfg.regularizer;
  g.lambda = cfg.lambda.value_or(default_lambda(cfg.regularizer));
  g.greedy = cfg.greedy;
  g.epsilon = cfg.epsilon;
  g.loss = cfg.loss;
  return g;
}

std::string trace_name(std::string_view strategy, Index budget_index, std::uint64_t seed) {
  return std::string(strategy) + "_b" + std::to_string(budget_index) + "_s" +
         std::to_string(seed) + ".csv";
}

namespace {

std::filesystem::path trace_dir(const ExperimentConfig& cfg) {
  const auto dir = cfg.output_dir / "traces";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

json cmd_run(const ExperimentConfig& cfg) {
  const auto dir = trace_dir(cfg);
  json summary = json::array();
  for (const std::uint64_t seed : cfg.seeds) {
    const PreparedData data = prepare_data(cfg, seed);
    const Index n = data.train.size();
    for (const Strategy strategy : cfg.strategies) {
      const bool full = strategy == Strategy::kFull;
      const std::size_t budgets = full ? 1 : cfg.budgets.size();
      for (std::size_t b = 0; b < budgets; ++b) {
        const double frac = full ? 1.0 : cfg.budgets[b];
        const Index k =
            std::clamp<Index>(static_cast<Index>(std::llround(frac * static_cast<double>(n))), 1, n);
        const auto name = to_string(strategy);
        TrainConfig tc;
        tc.model = {data.train.dim(), cfg.hidden, output_width(cfg.loss, data.train.num_classes)};
        tc.sgd.lr = cfg.lr;
        tc.sgd.batch_size = cfg.batch_size;
        tc.sgd.loss = cfg.loss;
        tc.epochs = cfg.epochs;
        tc.seed = cell_seed(seed, name, static_cast<Index>(b));
        tc.monitors = cfg.monitors;
        StrategyConfig sc;
        sc.strategy = strategy;
        sc.glister = glister_config(cfg, k);
        const RunResult r = run_strategy(data.train, data.val, data.test, tc, sc);

        const std::string file = trace_name(name, static_cast<Index>(b), seed);
        write_file(dir / file, r.trace.to_csv());
        const EpochRecord& last = r.trace.epochs.back();
        Index flipped = 0;
        for (Index i : r.subset)
          flipped += data.train.noise_flipped[static_cast<std::size_t>(i)] ? 1 : 0;
        summary.push_back({{"strategy", name},
                           {"budget", frac},
                           {"budget_index", b},
                           {"seed", seed},
                           {"k", static_cast<Index>(r.subset.size())},
                           {"n_train", n},
                           {"final_test_acc", last.test_acc},
                           {"final_val_loss", last.val_loss},
                           {"wall_s", last.wall_s},
                           {"sel_s", last.sel_s},
                           {"subset_digest", last.subset_digest},
                           {"noise_flipped_in_subset", flipped},
                           {"max_row_norm", data.max_row_norm},
                           {"trace", "traces/" + file}});
      }
    }
  }
  write_file(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

json cmd_active(const ExperimentConfig& cfg) {
  const auto dir = trace_dir(cfg);
  json summary = json::array();
  for (const std::uint64_t seed : cfg.seeds) {
    const PreparedData data = prepare_data(cfg, seed);
    for (const Acquisition a : cfg.acquisitions) {
      const auto name = to_string(a);
      ActiveConfig ac;
      ac.acquisition = a;
      ac.initial_labeled = cfg.initial_labeled;
      ac.batch = cfg.batch;
      ac.rounds = cfg.active_rounds;
      ac.epochs_per_round = cfg.epochs_per_round;
      ac.fass_filter_mult = cfg.fass_filter_mult;
      ac.model = {data.train.dim(), cfg.hidden, output_width(cfg.loss, data.train.num_classes)};
      ac.sgd.lr = cfg.lr;
      ac.sgd.batch_size = cfg.batch_size;
      ac.sgd.loss = cfg.loss;
      ac.glister = glister_config(cfg, std::min(cfg.batch, data.train.size()));
      ac.seed = cell_seed(seed, name, 0);
      const ActiveResult r = run_active(data.train, data.val, data.test, ac);

      const std::string file = trace_name(name, 0, seed);
      write_file(dir / file, r.to_csv());
      const ActiveRound& last = r.trace.back();
      summary.push_back({{"strategy", name},
                         {"seed", seed},
                         {"pool_size", data.train.size()},
                         {"final_labeled", last.labeled_count},
                         {"final_test_acc", last.test_acc},
                         {"final_val_loss", last.val_loss},
                         {"tainted_reads", r.tainted_reads},
                         {"trace", "traces/" + file}});
    }
  }
  write_file(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

json bench_json(const BenchResult& b) {
  return {{"n", b.n},
          {"d", b.d},
          {"k", b.k},
          {"r", b.r},
          {"sel_s", b.sel_s},
          {"train_s", b.train_s},
          {"sel_s_r_eq_k", b.sel_full_r_s},
          {"train_s_full", b.train_full_s}};
}

BenchResult bench_from_json(const json& j) {
  BenchResult b;
  b.n = j.at("n").get<Index>();
  b.d = j.at("d").get<Index>();
  b.k = j.at("k").get<Index>();
  b.r = j.at("r").get<Index>();
  b.sel_s = j.at("sel_s").get<double>();
  b.train_s = j.at("train_s").get<double>();
  b.sel_full_r_s = j.at("sel_s_r_eq_k").get<double>();
  b.train_full_s = j.at("train_s_full").get<double>();
  return b;
}

}  // namespace glister::cli
