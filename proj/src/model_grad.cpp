// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/model_grad.h"

#include <algorithm>
#include <cmath>

#include "model_detail.h"

namespace dash {

namespace {

void add_colsum(const Matrix& m, Vector& out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
}

// Accumulates into dx the gradient of y = gain * xhat + bias.
void layer_norm_backward(const Matrix& dy, const Matrix& xhat, const Vector& rstd, const Vector& gain,
                         Vector& dgain, Vector& dbias, Matrix& dx) {
  const std::size_t rows = dy.rows(), d = dy.cols();
  Vector dxhat(d);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto dyr = dy.row(r);
    const auto xh = xhat.row(r);
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dgain[c] += dyr[c] * xh[c];
      dbias[c] += dyr[c];
      dxhat[c] = dyr[c] * gain[c];
      mean_dxhat += dxhat[c];
      mean_dxhat_xhat += dxhat[c] * xh[c];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    auto dxr = dx.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      dxr[c] += rstd[r] * (dxhat[c] - mean_dxhat - xh[c] * mean_dxhat_xhat);
    }
  }
}

// Returns d(loss)/d(layer input) given d(loss)/d(layer output).
Matrix layer_backward(const ToyModel& model, int layer_index, const LayerTape& tape, const Matrix& dy,
                      LayerWeights& g) {
  if (tape.state == LayerState::kSkip) {
    Matrix dx = dy;
    for (double& v : dx.data()) v *= tape.scale;
    return dx;
  }
  const ModelConfig& cfg = model.config();
  const LayerWeights& w = model.weights().layers[static_cast<std::size_t>(layer_index - 1)];
  const auto mats = model.matrices_for(layer_index, tape.state);
  const std::size_t T = dy.rows(), d = dy.cols();
  const auto H = static_cast<std::size_t>(cfg.n_heads);
  const auto dh = static_cast<std::size_t>(cfg.head_dim());
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  // Feed-forward block.
  Matrix dx1 = dy;
  add_colsum(dy, g.b2);
  matmul_tn_accumulate(tape.g_used, dy, g.w2);
  Matrix dgact;
  matmul_nt(dy, *mats.w2, dgact);
  Matrix du = dgact;
  for (std::size_t i = 0; i < du.size(); ++i) du.data()[i] *= gelu_grad(tape.u.data()[i]);
  add_colsum(du, g.b1);
  matmul_tn_accumulate(tape.b_used, du, g.w1);
  Matrix db;
  matmul_nt(du, *mats.w1, db);
  layer_norm_backward(db, tape.xhat2, tape.rstd2, w.ln2_gain, g.ln2_gain, g.ln2_bias, dx1);

  // Attention block.
  Matrix dx = dx1;
  matmul_tn_accumulate(tape.o_used, dx1, g.wo);
  Matrix dout;
  matmul_nt(dx1, *mats.wo, dout);

  Matrix dq(T, d), dk(T, d), dv(T, d);
  Vector dp(T);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t off = h * dh;
    const Matrix& P = tape.probs[h];
    for (std::size_t t = 0; t < T; ++t) {
      const double* dot_ = dout.row(t).data() + off;
      double weighted = 0.0;
      for (std::size_t s = 0; s <= t; ++s) {
        const double* vs = tape.v.row(s).data() + off;
        double acc = 0.0;
        for (std::size_t c = 0; c < dh; ++c) acc += dot_[c] * vs[c];
        dp[s] = acc;
        weighted += P(t, s) * acc;
        double* dvs = dv.row(s).data() + off;
        for (std::size_t c = 0; c < dh; ++c) dvs[c] += P(t, s) * dot_[c];
      }
      const double* qt = tape.q.row(t).data() + off;
      double* dqt = dq.row(t).data() + off;
      for (std::size_t s = 0; s <= t; ++s) {
        const double ds = P(t, s) * (dp[s] - weighted) * inv_sqrt_dh;
        if (ds == 0.0) continue;
        const double* ks = tape.k.row(s).data() + off;
        double* dks = dk.row(s).data() + off;
        for (std::size_t c = 0; c < dh; ++c) {
          dqt[c] += ds * ks[c];
          dks[c] += ds * qt[c];
        }
      }
    }
  }
  matmul_tn_accumulate(tape.a_used, dq, g.wq);
  matmul_tn_accumulate(tape.a_used, dk, g.wk);
  matmul_tn_accumulate(tape.a_used, dv, g.wv);
  Matrix da, tmp;
  matmul_nt(dq, *mats.wq, da);
  matmul_nt(dk, *mats.wk, tmp);
  for (std::size_t i = 0; i < da.size(); ++i) da.data()[i] += tmp.data()[i];
  matmul_nt(dv, *mats.wv, tmp);
  for (std::size_t i = 0; i < da.size(); ++i) da.data()[i] += tmp.data()[i];
  layer_norm_backward(da, tape.xhat1, tape.rstd1, w.ln1_gain, g.ln1_gain, g.ln1_bias, dx);
  return dx;
}

}  // namespace

Matrix forward_taped(const ToyModel& model, std::span<const int> tokens, std::span<const LayerState> path,
                     const ScaleTable& scales, ForwardTape& tape) {
  const int L = model.n_layers();
  if (path.size() != static_cast<std::size_t>(L) || !satisfies_boundary_rules(path)) {
    throw Error("forward_taped: invalid path");
  }
  tape.tokens.assign(tokens.begin(), tokens.end());
  tape.layers.assign(static_cast<std::size_t>(L), LayerTape{});
  Matrix h = model.embed(tokens);
  for (int l = 1; l <= L; ++l) {
    h = detail::run_layer(model, h, l, path[static_cast<std::size_t>(l - 1)], scales, nullptr,
                          &tape.layers[static_cast<std::size_t>(l - 1)]);
  }
  Matrix y;
  detail::layer_norm(h, model.weights().lnf_gain, model.weights().lnf_bias, tape.xhatf, tape.rstdf, y);
  Matrix logits;
  matmul(y, model.weights().w_out, logits);
  tape.hf = std::move(y);
  return logits;
}

void backward(const ToyModel& model, const ForwardTape& tape, const Matrix& dlogits, ModelWeights& grads) {
  const ModelWeights& w = model.weights();
  matmul_tn_accumulate(tape.hf, dlogits, grads.w_out);
  Matrix dy;
  matmul_nt(dlogits, w.w_out, dy);
  Matrix dh(dy.rows(), dy.cols());
  layer_norm_backward(dy, tape.xhatf, tape.rstdf, w.lnf_gain, grads.lnf_gain, grads.lnf_bias, dh);
  for (int l = model.n_layers(); l >= 1; --l) {
    const auto i = static_cast<std::size_t>(l - 1);
    dh = layer_backward(model, l, tape.layers[i], dh, grads.layers[i]);
  }
  for (std::size_t t = 0; t < tape.tokens.size(); ++t) {
    auto te = grads.tok_emb.row(static_cast<std::size_t>(tape.tokens[t]));
    auto pe = grads.pos_emb.row(t);
    const auto dr = dh.row(t);
    for (std::size_t c = 0; c < dr.size(); ++c) {
      te[c] += dr[c];
      pe[c] += dr[c];
    }
  }
}

double sample_loss(const Matrix& logits, const Sample& sample, Matrix& dlogits) {
  dlogits = Matrix(logits.rows(), logits.cols());
  auto row_loss = [&](std::size_t r, int target, double weight) {
    const auto row = logits.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    auto drow = dlogits.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) drow[c] = weight * std::exp(row[c] - m) / z;
    drow[static_cast<std::size_t>(target)] -= weight;
    return -(row[static_cast<std::size_t>(target)] - m - std::log(z));
  };
  if (sample.is_classification()) {
    return row_loss(logits.rows() - 1, sample.label, 1.0);
  }
  if (sample.tokens.size() < 2) throw Error("sample_loss: language-model sample needs >= 2 tokens");
  const double weight = 1.0 / static_cast<double>(sample.tokens.size() - 1);
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < sample.tokens.size(); ++t) {
    total += row_loss(t, sample.tokens[t + 1], weight);
  }
  return total * weight;
}

}  // namespace dash
