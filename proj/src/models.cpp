#include "glister/models.hpp"

#include <algorithm>
#include <cstring>

namespace glister {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "cross_entropy") return LossKind::kCrossEntropy;
  if (name == "logistic") return LossKind::kLogistic;
  if (name == "squared") return LossKind::kSquared;
  if (name == "hinge") return LossKind::kHinge;
  if (name == "perceptron") return LossKind::kPerceptron;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kCrossEntropy: return "cross_entropy";
    case LossKind::kLogistic: return "logistic";
    case LossKind::kSquared: return "squared";
    case LossKind::kHinge: return "hinge";
    case LossKind::kPerceptron: return "perceptron";
  }
  return "?";
}

bool is_margin_loss(LossKind kind) {
  return kind == LossKind::kLogistic || kind == LossKind::kHinge ||
         kind == LossKind::kPerceptron;
}

Index output_width(LossKind kind, int num_classes) {
  if (is_margin_loss(kind)) {
    if (num_classes != 2) throw std::invalid_argument("margin losses need exactly 2 classes");
    return 1;
  }
  if (kind == LossKind::kSquared && num_classes == 2) return 1;
  return num_classes;
}

Vector Layer::flatten() const {
  Vector flat(num_params());
  std::copy(weight.data(), weight.data() + weight.size(), flat.data());
  flat.tail(bias.size()) = bias;
  return flat;
}

Layer Layer::unflatten(const Vector& flat, Index out_dim, Index in_dim) {
  if (flat.size() != out_dim * in_dim + out_dim)
    throw std::invalid_argument("layer unflatten: size mismatch");
  Layer layer;
  layer.weight.resize(out_dim, in_dim);
  std::copy(flat.data(), flat.data() + out_dim * in_dim, layer.weight.data());
  layer.bias = flat.tail(out_dim);
  return layer;
}

Index ModelParams::num_params() const {
  Index total = 0;
  for (const auto& l : layers) total += l.num_params();
  return total;
}

Vector ModelParams::flatten() const {
  Vector flat(num_params());
  Index off = 0;
  for (const auto& l : layers) {
    flat.segment(off, l.num_params()) = l.flatten();
    off += l.num_params();
  }
  return flat;
}

ModelParams ModelParams::with_values(const Vector& flat) const {
  if (flat.size() != num_params())
    throw std::invalid_argument("with_values: parameter count mismatch");
  ModelParams out;
  out.activation = activation;
  Index off = 0;
  for (const auto& l : layers) {
    out.layers.push_back(
        Layer::unflatten(flat.segment(off, l.num_params()), l.out_dim(), l.in_dim()));
    off += l.num_params();
  }
  return out;
}

void ModelParams::validate() const {
  if (layers.empty()) throw std::invalid_argument("model: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.out_dim())
      throw std::invalid_argument("model: bias width mismatch in layer " + std::to_string(i));
    if (i > 0 && layers[i - 1].out_dim() != l.in_dim())
      throw std::invalid_argument("model: layer " + std::to_string(i) + " does not compose");
    if (!l.weight.allFinite() || !l.bias.allFinite())
      throw std::invalid_argument("model: non-finite parameter");
  }
}

namespace {

Layer init_layer(Index out, Index in, SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Layer l;
  l.weight.resize(out, in);
  for (Index i = 0; i < l.weight.size(); ++i)
    l.weight.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
  l.bias.resize(out);
  for (Index i = 0; i < out; ++i) l.bias[i] = bound * (2.0 * rng.uniform() - 1.0);
  return l;
}

DenseMatrix affine(const Layer& l, const DenseMatrix& h) {
  if (h.cols() != l.in_dim()) throw std::invalid_argument("forward: input width mismatch");
  DenseMatrix z = h * l.weight.transpose();
  z.rowwise() += l.bias.transpose();
  return z;
}

void apply_activation(DenseMatrix& z, Activation act) {
  if (act == Activation::kRelu) z = z.cwiseMax(0.0);
}

// Inputs to every layer; entry 0 is x, the last entry feeds the final layer.
std::vector<DenseMatrix> layer_inputs(const ModelParams& params, const DenseMatrix& x) {
  std::vector<DenseMatrix> inputs{x};
  for (std::size_t i = 0; i + 1 < params.layers.size(); ++i) {
    DenseMatrix z = affine(params.layers[i], inputs.back());
    apply_activation(z, params.activation);
    inputs.push_back(std::move(z));
  }
  return inputs;
}

double margin_sign(int label) { return label == 1 ? 1.0 : -1.0; }

}  // namespace

ModelParams init_params(const ModelSpec& spec, SeededRng& rng) {
  if (spec.input_dim < 1 || spec.output_dim < 1 || spec.hidden < 0)
    throw std::invalid_argument("model spec: bad dimensions");
  ModelParams p;
  if (spec.hidden == 0) {
    p.activation = Activation::kIdentity;
    p.layers.push_back(init_layer(spec.output_dim, spec.input_dim, rng));
  } else {
    p.activation = Activation::kRelu;
    p.layers.push_back(init_layer(spec.hidden, spec.input_dim, rng));
    p.layers.push_back(init_layer(spec.output_dim, spec.hidden, rng));
  }
  return p;
}

DenseMatrix forward(const ModelParams& params, const DenseMatrix& x) {
  return affine(params.last(), penultimate(params, x));
}

DenseMatrix penultimate(const ModelParams& params, const DenseMatrix& x) {
  if (params.layers.empty()) throw std::invalid_argument("forward: model has no layers");
  return std::move(layer_inputs(params, x).back());
}

void check_labels(std::span<const int> labels, LossKind kind, Index width) {
  const bool binary = is_margin_loss(kind) || (kind == LossKind::kSquared && width == 1);
  if (is_margin_loss(kind) && width != 1)
    throw std::invalid_argument(std::string(to_string(kind)) + " loss needs one output");
  const int limit = binary ? 2 : static_cast<int>(width);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= limit)
      throw std::invalid_argument("label out of range at row " + std::to_string(i));
}

Vector per_sample_losses(const DenseMatrix& logits, std::span<const int> labels,
                         LossKind kind) {
  if (static_cast<Index>(labels.size()) != logits.rows())
    throw std::invalid_argument("loss: label count mismatch");
  check_labels(labels, kind, logits.cols());
  Vector out(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    switch (kind) {
      case LossKind::kCrossEntropy:
        out[i] = log_sum_exp(logits.row(i)) - logits(i, y);
        break;
      case LossKind::kLogistic:
        out[i] = softplus(-margin_sign(y) * logits(i, 0));
        break;
      case LossKind::kHinge:
        out[i] = std::max(0.0, 1.0 - margin_sign(y) * logits(i, 0));
        break;
      case LossKind::kPerceptron:
        out[i] = std::max(0.0, -margin_sign(y) * logits(i, 0));
        break;
      case LossKind::kSquared:
        if (logits.cols() == 1) {
          const double r = logits(i, 0) - margin_sign(y);
          out[i] = r * r;
        } else {
          double s = 0;
          for (Index c = 0; c < logits.cols(); ++c) {
            const double r = logits(i, c) - (c == y ? 1.0 : 0.0);
            s += r * r;
          }
          out[i] = s;
        }
        break;
    }
  }
  return out;
}

DenseMatrix logit_grads(const DenseMatrix& logits, std::span<const int> labels,
                        LossKind kind) {
  if (static_cast<Index>(labels.size()) != logits.rows())
    throw std::invalid_argument("loss: label count mismatch");
  check_labels(labels, kind, logits.cols());
  DenseMatrix g = DenseMatrix::Zero(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    const double s = margin_sign(y);
    switch (kind) {
      case LossKind::kCrossEntropy: {
        const double lse = log_sum_exp(logits.row(i));
        g.row(i) = (logits.row(i).array() - lse).exp();
        g(i, y) -= 1.0;
        break;
      }
      case LossKind::kLogistic:
        g(i, 0) = -s * sigmoid(-s * logits(i, 0));
        break;
      case LossKind::kHinge:
        if (1.0 - s * logits(i, 0) > 0) g(i, 0) = -s;
        break;
      case LossKind::kPerceptron:
        if (-s * logits(i, 0) > 0) g(i, 0) = -s;
        break;
      case LossKind::kSquared:
        if (logits.cols() == 1) {
          g(i, 0) = 2.0 * (logits(i, 0) - s);
        } else {
          for (Index c = 0; c < logits.cols(); ++c)
            g(i, c) = 2.0 * (logits(i, c) - (c == y ? 1.0 : 0.0));
        }
        break;
    }
  }
  return g;
}

double loss_value(const ModelParams& params, const DenseMatrix& x,
                  std::span<const int> labels, LossKind kind) {
  return per_sample_losses(forward(params, x), labels, kind).sum();
}

ModelParams grad_full(const ModelParams& params, const DenseMatrix& x,
                      std::span<const int> labels, LossKind kind) {
  const auto inputs = layer_inputs(params, x);
  DenseMatrix dz = logit_grads(affine(params.last(), inputs.back()), labels, kind);
  ModelParams grad = params;
  for (auto i = static_cast<std::ptrdiff_t>(params.layers.size()) - 1; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    const DenseMatrix& h = inputs[u];
    grad.layers[u].weight = dz.transpose() * h;
    grad.layers[u].bias = dz.colwise().sum().transpose();
    if (i == 0) break;
    DenseMatrix dh = dz * params.layers[u].weight;
    if (params.activation == Activation::kRelu)
      dh = (h.array() > 0.0).select(dh, 0.0);
    dz = std::move(dh);
  }
  return grad;
}

double layer_loss(const Layer& layer, const DenseMatrix& h, std::span<const int> labels,
                  LossKind kind) {
  return per_sample_losses(affine(layer, h), labels, kind).sum();
}

Vector layer_grad(const Layer& layer, const DenseMatrix& h, std::span<const int> labels,
                  LossKind kind) {
  const DenseMatrix dz = logit_grads(affine(layer, h), labels, kind);
  Layer g;
  g.weight = dz.transpose() * h;
  g.bias = dz.colwise().sum().transpose();
  return g.flatten();
}

DenseMatrix layer_per_sample_grads(const Layer& layer, const DenseMatrix& h,
                                   std::span<const int> labels, LossKind kind) {
  const DenseMatrix dz = logit_grads(affine(layer, h), labels, kind);
  const Index out = layer.out_dim();
  const Index in = layer.in_dim();
  DenseMatrix rows(h.rows(), out * in + out);
  for (Index i = 0; i < h.rows(); ++i) {
    for (Index o = 0; o < out; ++o) {
      rows.row(i).segment(o * in, in) = dz(i, o) * h.row(i);
      rows(i, out * in + o) = dz(i, o);
    }
  }
  return rows;
}

DenseMatrix last_layer_per_sample_grads(const ModelParams& params, const DenseMatrix& x,
                                        std::span<const int> labels, LossKind kind) {
  return layer_per_sample_grads(params.last(), penultimate(params, x), labels, kind);
}

ModelParams sgd_epoch(const ModelParams& params, const Dataset& ds,
                      std::span<const Index> subset, const SgdOptions& opt, SeededRng& rng) {
  if (subset.empty()) throw std::invalid_argument("sgd_epoch: empty subset");
  if (!(opt.lr >= 0)) throw std::invalid_argument("sgd_epoch: negative learning rate");
  if (opt.batch_size < 1) throw std::invalid_argument("sgd_epoch: batch size must be >= 1");
  std::vector<Index> order(subset.begin(), subset.end());
  std::sort(order.begin(), order.end());
  rng.shuffle(order);

  ModelParams current = params;
  const auto n = static_cast<Index>(order.size());
  for (Index start = 0; start < n; start += opt.batch_size) {
    const Index len = std::min(opt.batch_size, n - start);
    DenseMatrix xb(len, ds.dim());
    std::vector<int> yb(static_cast<std::size_t>(len));
    for (Index r = 0; r < len; ++r) {
      const Index i = order[static_cast<std::size_t>(start + r)];
      xb.row(r) = ds.features.row(i);
      yb[static_cast<std::size_t>(r)] = ds.labels[static_cast<std::size_t>(i)];
    }
    const ModelParams g = grad_full(current, xb, yb, opt.loss);
    for (std::size_t l = 0; l < current.layers.size(); ++l) {
      current.layers[l].weight -= opt.lr * g.layers[l].weight;
      current.layers[l].bias -= opt.lr * g.layers[l].bias;
    }
  }
  return current;
}

std::vector<int> hypothesized_labels(const ModelParams& params, const DenseMatrix& x) {
  const DenseMatrix logits = forward(params, x);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    if (logits.cols() == 1) {
      best = logits(i, 0) > 0 ? 1 : 0;
    } else {
      for (Index c = 1; c < logits.cols(); ++c)
        if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double accuracy(const ModelParams& params, const DenseMatrix& x, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const auto pred = hypothesized_labels(params, x);
  Index hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

namespace {

constexpr char kMagic[4] = {'G', 'L', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    std::memcpy(&bits, &v, sizeof(T));
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t b = 0; b < sizeof(T); ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw std::runtime_error("params: truncated input");
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
  pos += sizeof(T);
  if constexpr (std::is_floating_point_v<T>) {
    T v;
    std::memcpy(&v, &bits, sizeof(T));
    return v;
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

std::string serialize_params(const ModelParams& params) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, params.activation == Activation::kRelu ? 1 : 0);
  put<std::uint64_t>(out, params.layers.size());
  for (const auto& l : params.layers) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(l.out_dim()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(l.in_dim()));
    for (Index i = 0; i < l.weight.size(); ++i) put<double>(out, l.weight.data()[i]);
    for (Index i = 0; i < l.bias.size(); ++i) put<double>(out, l.bias[i]);
  }
  return out;
}

ModelParams deserialize_params(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kMagic, 4))
    throw std::runtime_error("params: bad magic");
  std::size_t pos = 4;
  if (get<std::uint32_t>(bytes, pos) != kVersion)
    throw std::runtime_error("params: unsupported version");
  const auto act = get<std::uint32_t>(bytes, pos);
  if (act > 1) throw std::runtime_error("params: bad activation tag");
  ModelParams p;
  p.activation = act == 1 ? Activation::kRelu : Activation::kIdentity;
  const auto count = get<std::uint64_t>(bytes, pos);
  if (count == 0 || count > 64) throw std::runtime_error("params: bad layer count");
  for (std::uint64_t l = 0; l < count; ++l) {
    const auto out = get<std::uint64_t>(bytes, pos);
    const auto in = get<std::uint64_t>(bytes, pos);
    if (out == 0 || in == 0 || out * in > (bytes.size() - pos) / 8)
      throw std::runtime_error("params: bad layer shape");
    Layer layer;
    layer.weight.resize(static_cast<Index>(out), static_cast<Index>(in));
    for (Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = get<double>(bytes, pos);
    layer.bias.resize(static_cast<Index>(out));
    for (Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = get<double>(bytes, pos);
    p.layers.push_back(std::move(layer));
  }
  if (pos != bytes.size()) throw std::runtime_error("params: trailing bytes");
  p.validate();
  return p;
}

}  // namespace glister
