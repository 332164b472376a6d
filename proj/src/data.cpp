#include "glister/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace glister {

namespace {

// ceil() that ignores floating noise such as 0.3 * 10 = 3.0000000000000004.
Index ceil_count(double x) { return static_cast<Index>(std::ceil(x - 1e-9)); }

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

Dataset Dataset::from(DenseMatrix features, std::vector<int> labels, int num_classes) {
  Dataset ds;
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.num_classes = num_classes;
  ds.noise_flipped.assign(ds.labels.size(), false);
  ds.original_labels = ds.labels;
  ds.validate();
  return ds;
}

void Dataset::validate() const {
  if (static_cast<Index>(labels.size()) != features.rows())
    throw std::invalid_argument("dataset: label count does not match rows");
  if (noise_flipped.size() != labels.size() || original_labels.size() != labels.size())
    throw std::invalid_argument("dataset: provenance flags do not match rows");
  if (num_classes < 1) throw std::invalid_argument("dataset: num_classes must be >= 1");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw std::invalid_argument("dataset: label out of range at row " + std::to_string(i));
    if (!noise_flipped[i] && original_labels[i] != labels[i])
      throw std::invalid_argument("dataset: unflipped row with differing original label");
  }
  if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature");
}

Dataset Dataset::subset(std::span<const Index> idx) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Index>(idx.size()), features.cols());
  out.labels.reserve(idx.size());
  out.noise_flipped.reserve(idx.size());
  out.original_labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const Index i = idx[r];
    if (i < 0 || i >= size()) throw std::out_of_range("dataset subset: index out of range");
    out.features.row(static_cast<Index>(r)) = features.row(i);
    const auto u = static_cast<std::size_t>(i);
    out.labels.push_back(labels[u]);
    out.noise_flipped.push_back(noise_flipped[u]);
    out.original_labels.push_back(original_labels[u]);
  }
  return out;
}

std::vector<Index> class_counts(std::span<const int> labels, int num_classes) {
  std::vector<Index> counts(static_cast<std::size_t>(num_classes), 0);
  for (const int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

std::vector<Index> class_counts(const Dataset& ds) {
  return class_counts(ds.labels, ds.num_classes);
}

Dataset parse_libsvm(std::string_view text) {
  struct Row {
    double label;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  Index dim = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    Row row;
    if (!parse_number(tokens[0], row.label) || !std::isfinite(row.label))
      throw ParseError(line_no, "non-numeric label '" + std::string(tokens[0]) + "'");
    Index last = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "format error: expected index:value, got '" +
                                      std::string(tok) + "'");
      long long idx = 0;
      double val = 0;
      if (!parse_number(tok.substr(0, colon), idx))
        throw ParseError(line_no, "non-numeric index '" + std::string(tok) + "'");
      if (!parse_number(tok.substr(colon + 1), val) || !std::isfinite(val))
        throw ParseError(line_no, "non-numeric value '" + std::string(tok) + "'");
      if (idx < 1) throw ParseError(line_no, "format error: index must be >= 1");
      if (idx <= last)
        throw ParseError(line_no, "format error: indices must be strictly increasing");
      last = static_cast<Index>(idx);
      row.entries.emplace_back(last, val);
    }
    dim = std::max(dim, last);
    rows.push_back(std::move(row));
  }

  std::vector<double> distinct;
  for (const auto& r : rows) distinct.push_back(r.label);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  DenseMatrix x = DenseMatrix::Zero(static_cast<Index>(rows.size()), dim);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [idx, val] : rows[i].entries) x(static_cast<Index>(i), idx - 1) = val;
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), rows[i].label);
    labels.push_back(static_cast<int>(it - distinct.begin()));
  }
  return Dataset::from(std::move(x), std::move(labels),
                       std::max<int>(1, static_cast<int>(distinct.size())));
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(buf.str());
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (Index i = 0; i < ds.size(); ++i) {
    out += std::to_string(ds.labels[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < ds.dim(); ++j) {
      const double v = ds.features(i, j);
      if (v == 0.0) continue;
      out += ' ';
      out += std::to_string(j + 1);
      out += ':';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void SplitSpec::validate() const {
  for (const double f : {train_frac, val_frac, test_frac})
    if (!(f > 0.0 && f < 1.0))
      throw std::invalid_argument("split: each fraction must lie in (0, 1)");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");
}

namespace {

std::vector<std::vector<Index>> rows_by_class(const Dataset& ds) {
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(ds.num_classes));
  for (Index i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
  return by_class;
}

}  // namespace

Splits split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  std::vector<Index> train, val, test;
  for (auto& rows : rows_by_class(ds)) {
    rng.shuffle(rows);
    const auto n = static_cast<double>(rows.size());
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val_frac * n + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(spec.test_frac * n + 1e-9));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r < n_val)
        val.push_back(rows[r]);
      else if (r < n_val + n_test)
        test.push_back(rows[r]);
      else
        train.push_back(rows[r]);
    }
  }
  if (train.empty() || val.empty() || test.empty())
    throw std::invalid_argument("split: a part would be empty");
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());
  return {ds.subset(train), ds.subset(val), ds.subset(test)};
}

std::pair<Dataset, Dataset> split_off(const Dataset& ds, double second_frac,
                                      std::uint64_t seed) {
  if (!(second_frac > 0.0 && second_frac < 1.0))
    throw std::invalid_argument("split_off: fraction must lie in (0, 1)");
  SeededRng rng(seed);
  std::vector<Index> first, second;
  for (auto& rows : rows_by_class(ds)) {
    rng.shuffle(rows);
    const auto n_second = static_cast<std::size_t>(
        std::floor(second_frac * static_cast<double>(rows.size()) + 1e-9));
    for (std::size_t r = 0; r < rows.size(); ++r)
      (r < n_second ? second : first).push_back(rows[r]);
  }
  if (first.empty() || second.empty())
    throw std::invalid_argument("split_off: a part would be empty");
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {ds.subset(first), ds.subset(second)};
}

Dataset inject_label_noise(const Dataset& ds, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("label noise: rate must lie in [0, 1)");
  if (ds.num_classes < 2) throw std::invalid_argument("label noise: needs >= 2 classes");
  Dataset out = ds;
  const Index count = std::lround(rate * static_cast<double>(ds.size()));
  SeededRng rng(seed);
  for (const Index i : rng.sample_without_replacement(ds.size(), count)) {
    const auto u = static_cast<std::size_t>(i);
    const int y = out.labels[u];
    auto other = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(ds.num_classes - 1)));
    if (other >= y) ++other;
    if (!out.noise_flipped[u]) out.original_labels[u] = y;
    out.labels[u] = other;
    out.noise_flipped[u] = true;
  }
  return out;
}

std::vector<int> imbalance_affected_classes(int num_classes, double affected_class_frac,
                                            std::uint64_t seed) {
  const Index n_affected = ceil_count(affected_class_frac * num_classes);
  SeededRng rng(seed);
  std::vector<int> affected;
  for (const Index c : rng.sample_without_replacement(num_classes, n_affected))
    affected.push_back(static_cast<int>(c));
  std::sort(affected.begin(), affected.end());
  return affected;
}

Dataset inject_class_imbalance(const Dataset& ds, double affected_class_frac,
                               double keep_frac, std::uint64_t seed) {
  if (!(affected_class_frac > 0.0 && affected_class_frac < 1.0) ||
      !(keep_frac > 0.0 && keep_frac < 1.0))
    throw std::invalid_argument("class imbalance: fractions must lie in (0, 1)");
  const auto affected = imbalance_affected_classes(ds.num_classes, affected_class_frac, seed);
  const SeededRng base(seed);
  auto by_class = rows_by_class(ds);
  std::vector<Index> kept;
  for (int c = 0; c < ds.num_classes; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    if (!std::binary_search(affected.begin(), affected.end(), c)) {
      kept.insert(kept.end(), rows.begin(), rows.end());
      continue;
    }
    const Index keep = ceil_count(keep_frac * static_cast<double>(rows.size()));
    if (keep == 0)
      throw std::invalid_argument("class imbalance: class " + std::to_string(c) +
                                  " would be emptied");
    SeededRng rng = base.split(static_cast<std::uint64_t>(c) + 1);
    for (const Index r : rng.sample_without_replacement(static_cast<Index>(rows.size()), keep))
      kept.push_back(rows[static_cast<std::size_t>(r)]);
  }
  std::sort(kept.begin(), kept.end());
  return ds.subset(kept);
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  static const std::pair<std::string_view, SyntheticKind> kinds[] = {
      {"separable-2", SyntheticKind::kSeparable2},
      {"separable-4", SyntheticKind::kSeparable4},
      {"overlapping-4", SyntheticKind::kOverlapping4},
      {"binary-slack", SyntheticKind::kBinarySlack},
      {"shifted-validation-2", SyntheticKind::kShiftedValidation2},
      {"shifted-validation-4", SyntheticKind::kShiftedValidation4},
  };
  for (const auto& [n, k] : kinds)
    if (n == name) return k;
  throw std::invalid_argument("unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kSeparable2: return "separable-2";
    case SyntheticKind::kSeparable4: return "separable-4";
    case SyntheticKind::kOverlapping4: return "overlapping-4";
    case SyntheticKind::kBinarySlack: return "binary-slack";
    case SyntheticKind::kShiftedValidation2: return "shifted-validation-2";
    case SyntheticKind::kShiftedValidation4: return "shifted-validation-4";
  }
  return "?";
}

SyntheticLayout synthetic_layout(SyntheticKind kind) {
  SyntheticLayout layout;
  const Eigen::Vector2d shift(0.5, 1.0);
  auto two = [](double a) {
    DenseMatrix c(2, 2);
    c << -a, 0.0, a, 0.0;
    return c;
  };
  auto four = [](double a) {
    DenseMatrix c(4, 2);
    c << -a, -a, a, -a, -a, a, a, a;
    return c;
  };
  switch (kind) {
    case SyntheticKind::kSeparable2:
      layout.centers = two(2.0);
      layout.stddev = 1.0;
      break;
    case SyntheticKind::kSeparable4:
      layout.centers = four(3.0);
      layout.stddev = 0.75;
      break;
    case SyntheticKind::kOverlapping4:
      layout.centers = four(1.5);
      layout.stddev = 1.0;
      break;
    case SyntheticKind::kBinarySlack:
      layout.centers = two(1.5);
      layout.stddev = 1.0;
      break;
    case SyntheticKind::kShiftedValidation2:
      layout.centers = two(1.5);
      layout.stddev = 1.0;
      layout.validation_offset = shift;
      break;
    case SyntheticKind::kShiftedValidation4:
      layout.centers = four(1.5);
      layout.stddev = 1.0;
      layout.validation_offset = shift;
      break;
  }
  return layout;
}

namespace {

Dataset sample_blobs(const DenseMatrix& centers, double stddev, Index n_per_class,
                     SeededRng& rng) {
  const auto classes = static_cast<int>(centers.rows());
  DenseMatrix x(n_per_class * classes, centers.cols());
  std::vector<int> y;
  y.reserve(static_cast<std::size_t>(x.rows()));
  Index row = 0;
  for (int c = 0; c < classes; ++c) {
    for (Index i = 0; i < n_per_class; ++i, ++row) {
      for (Index j = 0; j < centers.cols(); ++j) x(row, j) = centers(c, j) + stddev * rng.normal();
      y.push_back(c);
    }
  }
  return Dataset::from(std::move(x), std::move(y), classes);
}

}  // namespace

SyntheticData gen_synthetic(SyntheticKind kind, Index n_per_class, std::uint64_t seed) {
  if (n_per_class < 2) throw std::invalid_argument("gen_synthetic: n_per_class must be >= 2");
  const SyntheticLayout layout = synthetic_layout(kind);
  SeededRng rng(seed);
  SyntheticData out{sample_blobs(layout.centers, layout.stddev, n_per_class, rng), std::nullopt};
  if (layout.validation_offset) {
    DenseMatrix shifted = layout.centers.rowwise() + layout.validation_offset->transpose();
    SeededRng val_rng = SeededRng(seed).split(1);
    out.shifted_validation = sample_blobs(shifted, layout.stddev, n_per_class, val_rng);
  }
  return out;
}

Dataset gen_gaussian_classes(Index n, Index dim, int num_classes, double spread,
                             std::uint64_t seed) {
  SeededRng rng(seed);
  DenseMatrix centers(num_classes, dim);
  for (Index c = 0; c < num_classes; ++c)
    for (Index j = 0; j < dim; ++j) centers(c, j) = spread * rng.normal();
  DenseMatrix x(n, dim);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % num_classes);
    y[static_cast<std::size_t>(i)] = c;
    for (Index j = 0; j < dim; ++j) x(i, j) = centers(c, j) + rng.normal();
  }
  return Dataset::from(std::move(x), std::move(y), num_classes);
}

Standardizer Standardizer::fit(const Dataset& ds) {
  Standardizer s;
  const auto n = static_cast<double>(ds.size());
  s.mean = ds.features.colwise().mean();
  s.scale = ((ds.features.rowwise() - s.mean).array().square().colwise().sum() / n).sqrt();
  for (Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale[j] > 0)) s.scale[j] = 1.0;
  return s;
}

Dataset Standardizer::apply(const Dataset& ds) const {
  Dataset out = ds;
  out.features = ((ds.features.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  return out;
}

double max_row_norm(const DenseMatrix& x) {
  return x.rows() == 0 ? 0.0 : x.rowwise().norm().maxCoeff();
}

Binning Binning::fit(const Dataset& ds, int bins) {
  if (bins < 1) throw std::invalid_argument("binning: bins must be >= 1");
  Binning b;
  b.bins = bins;
  b.lo = ds.features.colwise().minCoeff();
  const Eigen::RowVectorXd hi = ds.features.colwise().maxCoeff();
  b.width = (hi - b.lo) / bins;
  for (Index j = 0; j < b.width.size(); ++j)
    if (!(b.width[j] > 0)) b.width[j] = 1.0;
  return b;
}

Dataset Binning::apply(const Dataset& ds) const {
  Dataset out = ds;
  for (Index i = 0; i < ds.size(); ++i)
    for (Index j = 0; j < ds.dim(); ++j) {
      const double raw = std::floor((ds.features(i, j) - lo[j]) / width[j]);
      out.features(i, j) = std::clamp(raw, 0.0, static_cast<double>(bins - 1));
    }
  return out;
}

}  // namespace glister
