// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Toy pre-norm decoder-only transformer. Every layer can run in one of four
// execution states: full precision, simulated 8-bit, simulated 4-bit, or
// skipped with a calibrated scalar compensation (out = scale * in).
//
// Low-bit execution is simulated by quantize-dequantize of the weight
// matrices and of the activations entering each weight matmul. Layer norms,
// residual adds and the attention score/value products stay in double.

#pragma once

#include <concepts>
#include <cstdint>
#include <type_traits>
#include <optional>
#include <span>
#include <vector>

#include "dash/layer_state.h"
#include "dash/numerics.h"
#include "dash/scale_table.h"

namespace dash {

struct ModelConfig {
  int n_layers = 6;
  int d_model = 32;
  int n_heads = 4;
  int d_ff = 64;
  int vocab_size = 16;
  int max_seq_len = 16;
  std::uint64_t seed = 1;

  /// Throws dash::Error when L < 3, heads do not divide d_model, or any
  /// dimension is nonpositive.
  void validate() const;
  int head_dim() const { return d_model / n_heads; }
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// ---------------------------------------------------------------------------
// Fake quantization

/// Symmetric per-tensor quantization with scale = max|v| / (2^(bits-1) - 1).
struct QuantSpec {
  int bits = 8;
  double scale = 0.0;

  int max_level() const { return (1 << (bits - 1)) - 1; }
  /// Derives the scale from the tensor's max-abs. Throws for bits not in {4, 8}.
  static QuantSpec for_values(std::span<const double> values, int bits);
};

/// round(v / scale) * scale, clamped to the representable range. All-zero
/// input yields all-zero output.
std::vector<double> fake_quantize(std::span<const double> values, const QuantSpec& spec);
/// Derives the QuantSpec from `values` and quantizes in place.
void fake_quantize_inplace(std::span<double> values, int bits);

// ---------------------------------------------------------------------------
// Weights

struct LayerWeights {
  Vector ln1_gain, ln1_bias;
  Matrix wq, wk, wv, wo;
  Vector ln2_gain, ln2_bias;
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct ModelWeights {
  Matrix tok_emb;  // vocab x d
  Matrix pos_emb;  // max_seq_len x d
  std::vector<LayerWeights> layers;
  Vector lnf_gain, lnf_bias;
  Matrix w_out;  // d x vocab

  /// Same shapes, all zero.
  static ModelWeights zeros_like(const ModelWeights& w);
  bool all_finite() const;
  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

/// Applies fn to every tensor (or to matching pairs of tensors) in a fixed order.
template <typename W, typename Fn>
  requires std::same_as<std::remove_const_t<W>, ModelWeights>
void for_each_tensor(W& a, Fn&& fn);
template <typename Fn>
void for_each_tensor(ModelWeights& a, const ModelWeights& b, Fn&& fn);

// ---------------------------------------------------------------------------
// Instrumentation

/// FLOPs (2 per multiply-add) spent in each layer body, plus the state that
/// was executed. Compensation scaling is counted separately.
struct FlopCounter {
  std::vector<std::uint64_t> body_flops;
  std::vector<std::uint64_t> compensation_flops;
  std::vector<std::optional<LayerState>> states;

  explicit FlopCounter(int n_layers)
      : body_flops(n_layers, 0), compensation_flops(n_layers, 0), states(n_layers) {}
  std::uint64_t total_body() const;
};

// ---------------------------------------------------------------------------

class ToyModel {
 public:
  /// Random initialization from config.seed.
  static ToyModel init(const ModelConfig& config);
  ToyModel(ModelConfig config, ModelWeights weights);

  const ModelConfig& config() const { return config_; }
  int n_layers() const { return config_.n_layers; }
  const ModelWeights& weights() const { return weights_; }
  /// Replaces the weights and regenerates the quantized variants.
  void set_weights(ModelWeights weights);

  /// Token + position embedding: the hidden state entering layer 1.
  Matrix embed(std::span<const int> tokens) const;

  /// Runs layer `layer_index` (1-based) in `state`. State 0 returns
  /// scales.lookup(layer_index) * h_in without touching the layer weights.
  Matrix layer_forward(const Matrix& h_in, int layer_index, LayerState state,
                       const ScaleTable& scales, FlopCounter* flops = nullptr) const;

  /// Final layer norm and vocabulary projection: one logit row per position.
  Matrix head(const Matrix& h) const;

  /// Reference forward: every layer at full precision, no state machinery.
  Matrix forward(std::span<const int> tokens) const;

  /// Composes layer_forward along `path`. The path must have length L and
  /// satisfy the boundary rules.
  Matrix forward_with_path(std::span<const int> tokens, std::span<const LayerState> path,
                           const ScaleTable& scales, FlopCounter* flops = nullptr) const;

  /// Hidden states entering each layer plus the final residual output
  /// (L + 1 matrices) under `path`.
  std::vector<Matrix> residual_stream(std::span<const int> tokens, std::span<const LayerState> path,
                                      const ScaleTable& scales) const;

  /// Weight matrices actually used for a layer in a given (non-skip) state.
  struct LayerMatrices {
    const Matrix* wq;
    const Matrix* wk;
    const Matrix* wv;
    const Matrix* wo;
    const Matrix* w1;
    const Matrix* w2;
  };
  LayerMatrices matrices_for(int layer_index, LayerState state) const;

 private:
  struct QuantizedLayer {
    Matrix wq, wk, wv, wo, w1, w2;
  };

  void check_tokens(std::span<const int> tokens) const;
  void check_path(std::span<const LayerState> path) const;
  void refresh_quantized();
  Matrix compute_layer(const Matrix& h_in, int layer_index, LayerState state, FlopCounter* flops) const;

  ModelConfig config_;
  ModelWeights weights_;
  std::vector<QuantizedLayer> int8_;
  std::vector<QuantizedLayer> int4_;
};

/// Predicted class: argmax of the last position's logits (lowest index on ties).
int predict_last(const Matrix& logits);

/// exp(mean next-token NLL) under forward_with_path. Needs >= 2 tokens.
double perplexity(const ToyModel& model, std::span<const LayerState> path, const ScaleTable& scales,
                  std::span<const int> tokens);
/// Sum of next-token NLL and the number of predicted positions.
std::pair<double, int> next_token_nll(const Matrix& logits, std::span<const int> tokens);

// ---------------------------------------------------------------------------

template <typename W, typename Fn>
  requires std::same_as<std::remove_const_t<W>, ModelWeights>
void for_each_tensor(W& a, Fn&& fn) {
  fn(a.tok_emb.data());
  fn(a.pos_emb.data());
  for (auto& l : a.layers) {
    fn(l.ln1_gain); fn(l.ln1_bias);
    fn(l.wq.data()); fn(l.wk.data()); fn(l.wv.data()); fn(l.wo.data());
    fn(l.ln2_gain); fn(l.ln2_bias);
    fn(l.w1.data()); fn(l.b1); fn(l.w2.data()); fn(l.b2);
  }
  fn(a.lnf_gain);
  fn(a.lnf_bias);
  fn(a.w_out.data());
}

template <typename Fn>
void for_each_tensor(ModelWeights& a, const ModelWeights& b, Fn&& fn) {
  fn(a.tok_emb.data(), b.tok_emb.data());
  fn(a.pos_emb.data(), b.pos_emb.data());
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    auto& l = a.layers[i];
    const auto& m = b.layers[i];
    fn(l.ln1_gain, m.ln1_gain); fn(l.ln1_bias, m.ln1_bias);
    fn(l.wq.data(), m.wq.data()); fn(l.wk.data(), m.wk.data());
    fn(l.wv.data(), m.wv.data()); fn(l.wo.data(), m.wo.data());
    fn(l.ln2_gain, m.ln2_gain); fn(l.ln2_bias, m.ln2_bias);
    fn(l.w1.data(), m.w1.data()); fn(l.b1, m.b1);
    fn(l.w2.data(), m.w2.data()); fn(l.b2, m.b2);
  }
  fn(a.lnf_gain, b.lnf_gain);
  fn(a.lnf_bias, b.lnf_bias);
  fn(a.w_out.data(), b.w_out.data());
}

}  // namespace dash
