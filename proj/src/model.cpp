// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "model_detail.h"

namespace dash {

void ModelConfig::validate() const {
  if (n_layers < 3) throw Error("ModelConfig: n_layers must be >= 3");
  if (d_model <= 0 || n_heads <= 0 || d_ff <= 0 || vocab_size <= 1 || max_seq_len <= 0) {
    throw Error("ModelConfig: dimensions must be positive");
  }
  if (d_model % n_heads != 0) throw Error("ModelConfig: n_heads must divide d_model");
}

// ---------------------------------------------------------------------------

QuantSpec QuantSpec::for_values(std::span<const double> values, int bits) {
  if (bits != 4 && bits != 8) throw Error("fake_quantize: bits must be 4 or 8");
  double max_abs = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("fake_quantize: non-finite value");
    max_abs = std::max(max_abs, std::abs(v));
  }
  QuantSpec spec;
  spec.bits = bits;
  spec.scale = max_abs / static_cast<double>((1 << (bits - 1)) - 1);
  return spec;
}

std::vector<double> fake_quantize(std::span<const double> values, const QuantSpec& spec) {
  if (spec.bits != 4 && spec.bits != 8) throw Error("fake_quantize: bits must be 4 or 8");
  std::vector<double> out(values.size(), 0.0);
  if (!(spec.scale > 0.0)) return out;
  const double limit = spec.max_level();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double level = std::clamp(std::round(values[i] / spec.scale), -limit, limit);
    out[i] = level * spec.scale;
  }
  return out;
}

void fake_quantize_inplace(std::span<double> values, int bits) {
  const QuantSpec spec = QuantSpec::for_values(values, bits);
  if (!(spec.scale > 0.0)) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  const double limit = spec.max_level();
  for (double& v : values) v = std::clamp(std::round(v / spec.scale), -limit, limit) * spec.scale;
}

// ---------------------------------------------------------------------------

ModelWeights ModelWeights::zeros_like(const ModelWeights& w) {
  ModelWeights z = w;
  for_each_tensor(z, [](std::vector<double>& t) { std::fill(t.begin(), t.end(), 0.0); });
  return z;
}

bool ModelWeights::all_finite() const {
  bool ok = true;
  for_each_tensor(*this, [&](const std::vector<double>& t) {
    for (double v : t) ok = ok && std::isfinite(v);
  });
  return ok;
}

std::uint64_t FlopCounter::total_body() const {
  std::uint64_t total = 0;
  for (auto f : body_flops) total += f;
  return total;
}

// ---------------------------------------------------------------------------

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

ToyModel ToyModel::init(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto d = static_cast<std::size_t>(config.d_model);
  const auto f = static_cast<std::size_t>(config.d_ff);
  const auto v = static_cast<std::size_t>(config.vocab_size);
  const double in_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double in_f = 1.0 / std::sqrt(static_cast<double>(f));
  // Residual-branch output projections start small so that an untrained
  // stack stays close to the identity.
  const double out_scale = 0.5 / std::sqrt(static_cast<double>(config.n_layers));

  ModelWeights w;
  w.tok_emb = uniform_matrix(v, d, 1.0, rng);
  w.pos_emb = uniform_matrix(static_cast<std::size_t>(config.max_seq_len), d, 1.0, rng);
  for (int l = 0; l < config.n_layers; ++l) {
    LayerWeights lw;
    lw.ln1_gain.assign(d, 1.0);
    lw.ln1_bias.assign(d, 0.0);
    lw.wq = uniform_matrix(d, d, in_d, rng);
    lw.wk = uniform_matrix(d, d, in_d, rng);
    lw.wv = uniform_matrix(d, d, in_d, rng);
    lw.wo = uniform_matrix(d, d, in_d * out_scale, rng);
    lw.ln2_gain.assign(d, 1.0);
    lw.ln2_bias.assign(d, 0.0);
    lw.w1 = uniform_matrix(d, f, in_d, rng);
    lw.b1.assign(f, 0.0);
    lw.w2 = uniform_matrix(f, d, in_f * out_scale, rng);
    lw.b2.assign(d, 0.0);
    w.layers.push_back(std::move(lw));
  }
  w.lnf_gain.assign(d, 1.0);
  w.lnf_bias.assign(d, 0.0);
  w.w_out = uniform_matrix(d, v, in_d, rng);
  return ToyModel(config, std::move(w));
}

ToyModel::ToyModel(ModelConfig config, ModelWeights weights) : config_(config) {
  config_.validate();
  set_weights(std::move(weights));
}

void ToyModel::set_weights(ModelWeights weights) {
  const auto d = static_cast<std::size_t>(config_.d_model);
  if (weights.layers.size() != static_cast<std::size_t>(config_.n_layers) ||
      weights.tok_emb.rows() != static_cast<std::size_t>(config_.vocab_size) ||
      weights.tok_emb.cols() != d || weights.pos_emb.rows() != static_cast<std::size_t>(config_.max_seq_len) ||
      weights.w_out.rows() != d || weights.w_out.cols() != static_cast<std::size_t>(config_.vocab_size)) {
    throw Error("ToyModel: weight shapes do not match config");
  }
  if (!weights.all_finite()) throw Error("ToyModel: non-finite weights");
  weights_ = std::move(weights);
  refresh_quantized();
}

void ToyModel::refresh_quantized() {
  auto quantize = [](const Matrix& m, int bits) {
    return Matrix(m.rows(), m.cols(), fake_quantize(m.data(), QuantSpec::for_values(m.data(), bits)));
  };
  int8_.clear();
  int4_.clear();
  for (const auto& l : weights_.layers) {
    int8_.push_back({quantize(l.wq, 8), quantize(l.wk, 8), quantize(l.wv, 8), quantize(l.wo, 8),
                     quantize(l.w1, 8), quantize(l.w2, 8)});
    int4_.push_back({quantize(l.wq, 4), quantize(l.wk, 4), quantize(l.wv, 4), quantize(l.wo, 4),
                     quantize(l.w1, 4), quantize(l.w2, 4)});
  }
}

ToyModel::LayerMatrices ToyModel::matrices_for(int layer_index, LayerState state) const {
  if (layer_index < 1 || layer_index > config_.n_layers) throw Error("layer index out of range");
  const auto i = static_cast<std::size_t>(layer_index - 1);
  switch (state) {
    case LayerState::kFull: {
      const auto& l = weights_.layers[i];
      return {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2};
    }
    case LayerState::kInt8: {
      const auto& l = int8_[i];
      return {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2};
    }
    case LayerState::kInt4: {
      const auto& l = int4_[i];
      return {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2};
    }
    case LayerState::kSkip: break;
  }
  throw Error("skipped layers have no weight matrices");
}

void ToyModel::check_tokens(std::span<const int> tokens) const {
  if (tokens.empty()) throw Error("empty token sequence");
  if (tokens.size() > static_cast<std::size_t>(config_.max_seq_len)) throw Error("sequence exceeds max_seq_len");
  for (int t : tokens) {
    if (t < 0 || t >= config_.vocab_size) throw Error("token id out of vocabulary");
  }
}

void ToyModel::check_path(std::span<const LayerState> path) const {
  if (path.size() != static_cast<std::size_t>(config_.n_layers)) throw Error("path length must equal n_layers");
  if (!satisfies_boundary_rules(path)) throw Error("path must run the first and last layer in state 4");
  for (LayerState s : path) (void)state_from_code(code(s));
}

Matrix ToyModel::embed(std::span<const int> tokens) const {
  check_tokens(tokens);
  const auto d = static_cast<std::size_t>(config_.d_model);
  Matrix x(tokens.size(), d);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto te = weights_.tok_emb.row(static_cast<std::size_t>(tokens[t]));
    const auto pe = weights_.pos_emb.row(t);
    auto row = x.row(t);
    for (std::size_t c = 0; c < d; ++c) row[c] = te[c] + pe[c];
  }
  return x;
}

Matrix ToyModel::layer_forward(const Matrix& h_in, int layer_index, LayerState state,
                               const ScaleTable& scales, FlopCounter* flops) const {
  if (layer_index < 1 || layer_index > config_.n_layers) throw Error("layer_forward: layer index out of range");
  if (h_in.cols() != static_cast<std::size_t>(config_.d_model) || h_in.rows() == 0 ||
      h_in.rows() > static_cast<std::size_t>(config_.max_seq_len)) {
    throw Error("layer_forward: hidden state shape does not match config");
  }
  (void)state_from_code(code(state));
  return detail::run_layer(*this, h_in, layer_index, state, scales, flops, nullptr);
}

Matrix ToyModel::compute_layer(const Matrix& h_in, int layer_index, LayerState state, FlopCounter* flops) const {
  static const ScaleTable kUnused;
  return detail::run_layer(*this, h_in, layer_index, state, kUnused, flops, nullptr);
}

Matrix ToyModel::head(const Matrix& h) const {
  Matrix xhat, y;
  Vector rstd;
  detail::layer_norm(h, weights_.lnf_gain, weights_.lnf_bias, xhat, rstd, y);
  Matrix logits;
  matmul(y, weights_.w_out, logits);
  return logits;
}

Matrix ToyModel::forward(std::span<const int> tokens) const {
  Matrix h = embed(tokens);
  for (int l = 1; l <= config_.n_layers; ++l) h = compute_layer(h, l, LayerState::kFull, nullptr);
  return head(h);
}

Matrix ToyModel::forward_with_path(std::span<const int> tokens, std::span<const LayerState> path,
                                   const ScaleTable& scales, FlopCounter* flops) const {
  check_path(path);
  Matrix h = embed(tokens);
  for (int l = 1; l <= config_.n_layers; ++l) {
    h = layer_forward(h, l, path[static_cast<std::size_t>(l - 1)], scales, flops);
  }
  return head(h);
}

std::vector<Matrix> ToyModel::residual_stream(std::span<const int> tokens, std::span<const LayerState> path,
                                              const ScaleTable& scales) const {
  check_path(path);
  std::vector<Matrix> stream;
  stream.reserve(static_cast<std::size_t>(config_.n_layers) + 1);
  stream.push_back(embed(tokens));
  for (int l = 1; l <= config_.n_layers; ++l) {
    stream.push_back(layer_forward(stream.back(), l, path[static_cast<std::size_t>(l - 1)], scales));
  }
  return stream;
}

// ---------------------------------------------------------------------------

namespace detail {

void layer_norm(const Matrix& x, const Vector& gain, const Vector& bias, Matrix& xhat, Vector& rstd, Matrix& y) {
  const std::size_t rows = x.rows(), d = x.cols();
  xhat = Matrix(rows, d);
  y = Matrix(rows, d);
  rstd.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto xr = x.row(r);
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + kLayerNormEps);
    rstd[r] = rs;
    auto xh = xhat.row(r);
    auto yr = y.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      xh[c] = (xr[c] - mean) * rs;
      yr[c] = xh[c] * gain[c] + bias[c];
    }
  }
}

Matrix run_layer(const ToyModel& model, const Matrix& x, int layer_index, LayerState state,
                 const ScaleTable& scales, FlopCounter* flops, LayerTape* tape) {
  const auto li = static_cast<std::size_t>(layer_index - 1);
  const std::size_t T = x.rows();
  const std::size_t d = x.cols();

  if (tape) tape->state = state;
  if (flops) flops->states[li] = state;

  if (state == LayerState::kSkip) {
    const double s = scales.lookup(layer_index);
    Matrix out = x;
    for (double& v : out.data()) v *= s;
    if (tape) tape->scale = s;
    if (flops) flops->compensation_flops[li] += T * d;
    return out;
  }

  const ModelConfig& cfg = model.config();
  const LayerWeights& w = model.weights().layers[li];
  const auto mats = model.matrices_for(layer_index, state);
  const int bits = state == LayerState::kInt8 ? 8 : (state == LayerState::kInt4 ? 4 : 0);
  const auto H = static_cast<std::size_t>(cfg.n_heads);
  const auto dh = static_cast<std::size_t>(cfg.head_dim());
  const auto f = static_cast<std::size_t>(cfg.d_ff);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  // Attention block.
  Matrix xhat1, a;
  Vector rstd1;
  layer_norm(x, w.ln1_gain, w.ln1_bias, xhat1, rstd1, a);
  if (bits) fake_quantize_inplace(a.data(), bits);
  Matrix q, k, v;
  matmul(a, *mats.wq, q);
  matmul(a, *mats.wk, k);
  matmul(a, *mats.wv, v);

  Matrix o(T, d);
  std::vector<Matrix> probs;
  if (tape) probs.assign(H, Matrix(T, T));
  Vector p(T);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t off = h * dh;
    for (std::size_t t = 0; t < T; ++t) {
      const double* qt = q.row(t).data() + off;
      double max_s = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s <= t; ++s) {
        const double* ks = k.row(s).data() + off;
        double acc = 0.0;
        for (std::size_t c = 0; c < dh; ++c) acc += qt[c] * ks[c];
        p[s] = acc * inv_sqrt_dh;
        max_s = std::max(max_s, p[s]);
      }
      double total = 0.0;
      for (std::size_t s = 0; s <= t; ++s) {
        p[s] = std::exp(p[s] - max_s);
        total += p[s];
      }
      double* ot = o.row(t).data() + off;
      for (std::size_t s = 0; s <= t; ++s) {
        p[s] /= total;
        const double* vs = v.row(s).data() + off;
        for (std::size_t c = 0; c < dh; ++c) ot[c] += p[s] * vs[c];
        if (tape) probs[h](t, s) = p[s];
      }
    }
  }
  if (bits) fake_quantize_inplace(o.data(), bits);
  Matrix attn;
  matmul(o, *mats.wo, attn);
  Matrix x1 = x;
  for (std::size_t i = 0; i < x1.size(); ++i) x1.data()[i] += attn.data()[i];

  // Feed-forward block.
  Matrix xhat2, b;
  Vector rstd2;
  layer_norm(x1, w.ln2_gain, w.ln2_bias, xhat2, rstd2, b);
  if (bits) fake_quantize_inplace(b.data(), bits);
  Matrix u;
  matmul(b, *mats.w1, u);
  Matrix g(T, f);
  for (std::size_t t = 0; t < T; ++t) {
    auto ur = u.row(t);
    auto gr = g.row(t);
    for (std::size_t c = 0; c < f; ++c) {
      ur[c] += w.b1[c];
      gr[c] = gelu(ur[c]);
    }
  }
  if (bits) fake_quantize_inplace(g.data(), bits);
  Matrix ffn;
  matmul(g, *mats.w2, ffn);
  Matrix out = std::move(x1);
  for (std::size_t t = 0; t < T; ++t) {
    auto orow = out.row(t);
    const auto fr = ffn.row(t);
    for (std::size_t c = 0; c < d; ++c) orow[c] += fr[c] + w.b2[c];
  }

  if (flops) {
    const std::uint64_t proj = 2ULL * T * d * d * 4;
    const std::uint64_t att = 2ULL * 2 * H * dh * (T * (T + 1) / 2);
    const std::uint64_t mlp = 2ULL * T * d * f * 2;
    flops->body_flops[li] += proj + att + mlp;
  }

  if (tape) {
    tape->xhat1 = std::move(xhat1);
    tape->rstd1 = std::move(rstd1);
    tape->a_used = std::move(a);
    tape->q = std::move(q);
    tape->k = std::move(k);
    tape->v = std::move(v);
    tape->probs = std::move(probs);
    tape->o_used = std::move(o);
    tape->xhat2 = std::move(xhat2);
    tape->rstd2 = std::move(rstd2);
    tape->b_used = std::move(b);
    tape->u = std::move(u);
    tape->g_used = std::move(g);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

int predict_last(const Matrix& logits) {
  if (logits.rows() == 0) throw Error("predict_last: empty logits");
  const auto row = logits.row(logits.rows() - 1);
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::pair<double, int> next_token_nll(const Matrix& logits, std::span<const int> tokens) {
  if (tokens.size() < 2) throw Error("perplexity needs at least two tokens");
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    const auto row = logits.row(t);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    total += -(row[static_cast<std::size_t>(tokens[t + 1])] - m - std::log(z));
  }
  return {total, static_cast<int>(tokens.size() - 1)};
}

double perplexity(const ToyModel& model, std::span<const LayerState> path, const ScaleTable& scales,
                  std::span<const int> tokens) {
  if (tokens.size() < 2) throw Error("perplexity needs at least two tokens");
  const Matrix logits = model.forward_with_path(tokens, path, scales);
  const auto [nll, n] = next_token_nll(logits, tokens);
  return std::exp(nll / n);
}

}  // namespace dash
