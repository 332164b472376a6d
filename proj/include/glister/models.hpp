#pragma once

// Logistic regression and one-hidden-layer MLP classifiers with summed losses,
// analytic gradients, last-layer per-sample gradients and a seeded SGD trainer.

#include "glister/data.hpp"
#include "glister/numerics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace glister {

enum class Activation { kIdentity, kRelu };

enum class LossKind { kCrossEntropy, kLogistic, kSquared, kHinge, kPerceptron };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

/// Logistic, hinge and perceptron losses work on a single margin output with
/// class 1 encoded as +1 and class 0 as -1.
bool is_margin_loss(LossKind kind);

/// Width of the final layer for a loss and class count. Margin losses and
/// binary squared loss use one output; everything else uses one per class.
Index output_width(LossKind kind, int num_classes);

/// One affine map: z = weight * h + bias, weight is out x in.
struct Layer {
  DenseMatrix weight;
  Vector bias;

  Index in_dim() const { return weight.cols(); }
  Index out_dim() const { return weight.rows(); }
  Index num_params() const { return weight.size() + bias.size(); }

  /// Weight row-major, then bias.
  Vector flatten() const;
  static Layer unflatten(const Vector& flat, Index out_dim, Index in_dim);
};

struct ModelParams {
  std::vector<Layer> layers;
  Activation activation = Activation::kIdentity;

  Index input_dim() const { return layers.front().in_dim(); }
  Index output_dim() const { return layers.back().out_dim(); }
  Index num_params() const;
  const Layer& last() const { return layers.back(); }

  /// Layers in order, each flattened as Layer::flatten.
  Vector flatten() const;
  /// Same shapes as *this, values from `flat`.
  ModelParams with_values(const Vector& flat) const;

  void validate() const;
};

/// hidden == 0 builds logistic regression (single layer, identity).
struct ModelSpec {
  Index input_dim = 0;
  Index hidden = 100;
  Index output_dim = 1;
};

/// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ModelParams init_params(const ModelSpec& spec, SeededRng& rng);

/// Logits, one row per input row.
DenseMatrix forward(const ModelParams& params, const DenseMatrix& x);

/// Input to the final layer (x itself for logistic regression).
DenseMatrix penultimate(const ModelParams& params, const DenseMatrix& x);

/// Throws std::invalid_argument if labels do not suit the loss and width.
void check_labels(std::span<const int> labels, LossKind kind, Index width);

/// Per-row losses for given logits.
Vector per_sample_losses(const DenseMatrix& logits, std::span<const int> labels,
                         LossKind kind);

/// d(loss_i)/d(logits_i), one row per sample. At hinge and perceptron kinks
/// the subgradient 0 is used.
DenseMatrix logit_grads(const DenseMatrix& logits, std::span<const int> labels,
                        LossKind kind);

/// Summed loss over rows.
double loss_value(const ModelParams& params, const DenseMatrix& x,
                  std::span<const int> labels, LossKind kind);

/// Gradient of loss_value, shaped like `params`.
ModelParams grad_full(const ModelParams& params, const DenseMatrix& x,
                      std::span<const int> labels, LossKind kind);

/// Row i is the gradient of sample i's loss w.r.t. the flattened last layer.
DenseMatrix last_layer_per_sample_grads(const ModelParams& params, const DenseMatrix& x,
                                        std::span<const int> labels, LossKind kind);

/// Last-layer-only evaluations on precomputed penultimate features `h`.
double layer_loss(const Layer& layer, const DenseMatrix& h, std::span<const int> labels,
                  LossKind kind);
Vector layer_grad(const Layer& layer, const DenseMatrix& h, std::span<const int> labels,
                  LossKind kind);
DenseMatrix layer_per_sample_grads(const Layer& layer, const DenseMatrix& h,
                                   std::span<const int> labels, LossKind kind);

struct SgdOptions {
  double lr = 0.05;
  Index batch_size = 20;
  LossKind loss = LossKind::kCrossEntropy;
};

/// One pass over `subset` (sorted, then shuffled by `rng`) in mini-batches.
/// Each step subtracts lr times the summed batch gradient.
ModelParams sgd_epoch(const ModelParams& params, const Dataset& ds,
                      std::span<const Index> subset, const SgdOptions& opt, SeededRng& rng);

/// Argmax of the logits per row, lowest class id on ties. A single-output
/// model predicts class 1 when its logit is positive.
std::vector<int> hypothesized_labels(const ModelParams& params, const DenseMatrix& x);

double accuracy(const ModelParams& params, const DenseMatrix& x, std::span<const int> labels);

/// Versioned little-endian binary: "GLMP", u32 version, u32 activation,
/// u64 layer count, then per layer u64 out, u64 in, weight row-major, bias.
std::string serialize_params(const ModelParams& params);
ModelParams deserialize_params(std::string_view bytes);

}  // namespace glister
