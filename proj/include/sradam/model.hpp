#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sradam/rng.hpp"
#include "sradam/vec.hpp"

namespace sradam {

/// Dense tensor, batch-major. Rank-2 data (a feature matrix) is stored with
/// h = w = 1, so features() is the row width either way. Layout is
/// ((n * c + ci) * h + hi) * w + wi.
template <class T>
struct Tensor {
  std::vector<T> data;
  int n = 0, c = 0, h = 1, w = 1;

  static Tensor image(int n, int c, int h, int w) {
    Tensor t;
    t.n = n; t.c = c; t.h = h; t.w = w;
    t.data.assign(static_cast<std::size_t>(n) * c * h * w, T(0));
    return t;
  }
  static Tensor matrix(int n, int d) { return image(n, d, 1, 1); }

  std::size_t size() const { return data.size(); }
  int features() const { return c * h * w; }
  T* row(int i) { return data.data() + static_cast<std::size_t>(i) * features(); }
  const T* row(int i) const {
    return data.data() + static_cast<std::size_t>(i) * features();
  }
};

struct ConvSpec {
  int in_ch = 0, out_ch = 0, k = 0, stride = 1, pad = 0;
};
struct ReluSpec {};
struct MaxPoolSpec {
  int k = 2, stride = 2;
};
struct FlattenSpec {};
struct DenseSpec {
  int in = 0, out = 0;
};
struct DropoutSpec {
  double rate = 0.5;
};

using LayerSpec = std::variant<ConvSpec, ReluSpec, MaxPoolSpec, FlattenSpec,
                               DenseSpec, DropoutSpec>;

/// Architecture description. Input is (in_ch, in_h, in_w); plain feature
/// vectors use in_h = in_w = 1.
struct ModelSpec {
  std::string id;
  int in_ch = 0, in_h = 1, in_w = 1;
  int num_classes = 0;
  std::vector<LayerSpec> layers;

  /// Conv(3x3, pad 1) x2 with 2x2 max pools, then 128-wide dense head with
  /// dropout 0.2. hw must be divisible by 4.
  static ModelSpec simple_cnn(int in_ch = 3, int hw = 32, int classes = 10);
  static ModelSpec mlp(int in_dim, int hidden, int classes);
  static ModelSpec logistic(int in_dim, int classes);

  /// Checks that layer shapes chain and the last layer emits num_classes.
  void validate() const;

  /// Weight/bias groups in layer order; conv weights are OIHW flattened,
  /// dense weights are (out, in) row-major.
  std::vector<ParamGroup> param_groups() const;
  std::size_t param_count() const;
};

/// Fan-in scaled uniform init: weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))
/// drawn in group-then-index order, biases zero.
std::vector<ParamVector> init_params(const ModelSpec& spec, Rng& rng);

enum class Mode { Train, Eval };

/// Per-layer working scalars, aligned with ModelSpec::param_groups().
template <class T>
using Params = std::vector<std::vector<T>>;

template <class T>
Params<T> cast_params(std::span<const ParamVector> params);

template <class T>
struct LayerCache {
  Tensor<T> output;
  std::vector<std::int32_t> argmax;  ///< max-pool winners, flat input offsets
  std::vector<T> mask;               ///< dropout multipliers
};

template <class T>
struct ForwardCache {
  std::vector<LayerCache<T>> layers;
  const Tensor<T>& logits() const { return layers.back().output; }
};

/// Runs the network. Train mode applies dropout (requires dropout_rng when
/// the model has a dropout layer with rate > 0); eval mode is deterministic
/// and leaves the rng untouched.
template <class T>
ForwardCache<T> forward(const ModelSpec& spec, const Params<T>& params,
                        const Tensor<T>& input, Mode mode,
                        Rng* dropout_rng = nullptr);

/// Mean cross entropy with a fused stable softmax, accumulated in double.
/// Throws if the result is non-finite (training diverged).
template <class T>
double cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

/// Fraction of rows whose argmax (lowest index wins ties) equals the label.
template <class T>
double accuracy(const Tensor<T>& logits, std::span<const int> labels);

struct LossGrad {
  double loss = 0.0;
  std::vector<ParamVector> grads;  ///< aligned with param_groups(), mean-reduced
};

/// Train-mode forward plus full backward pass. Gradients come back widened
/// to double regardless of T.
template <class T>
LossGrad loss_and_grad(const ModelSpec& spec, const Params<T>& params,
                       const Tensor<T>& inputs, std::span<const int> labels,
                       Rng* dropout_rng = nullptr);

}  // namespace sradam
