// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace dash {

bool DecisionTrace::rewarded() const {
  for (const auto& s : steps) {
    if (!s.reward) return false;
  }
  return true;
}

std::string to_string(ScorerHead head) { return head == ScorerHead::kPerCandidate ? "per_candidate" : "shared"; }

ScorerHead scorer_head_from_string(const std::string& s) {
  if (s == "per_candidate") return ScorerHead::kPerCandidate;
  if (s == "shared" || s == "single") return ScorerHead::kShared;
  throw Error("unknown scorer head '" + s + "'");
}

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
}

}  // namespace

ScorerParams ScorerParams::init(const ScorerDims& dims, double alpha_penalty, std::uint64_t seed) {
  ScorerParams p;
  p.dims = dims;
  p.alpha_penalty = alpha_penalty;
  const auto in = static_cast<std::size_t>(dims.input_dim());
  const auto d1 = static_cast<std::size_t>(dims.d1);
  const auto d2 = static_cast<std::size_t>(dims.d2);
  p.w1 = Matrix(in, d1);
  p.w2 = Matrix(d1, d2);
  p.w3 = Matrix(d2, static_cast<std::size_t>(dims.n_outputs()));
  p.emb = Matrix(static_cast<std::size_t>(dims.n_layers) + 1, static_cast<std::size_t>(dims.d_l));
  p.validate();
  Rng rng(seed ^ 0x73636f726572ULL);
  fill_uniform(p.w1, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  fill_uniform(p.w2, 1.0 / std::sqrt(static_cast<double>(d1)), rng);
  fill_uniform(p.w3, 1.0 / std::sqrt(static_cast<double>(d2)), rng);
  fill_uniform(p.emb, 1.0, rng);
  return p;
}

ScorerParams ScorerParams::zeros_like(const ScorerParams& p) {
  ScorerParams z = p;
  for (Matrix* m : {&z.w1, &z.w2, &z.w3, &z.emb}) m->fill(0.0);
  return z;
}

void ScorerParams::validate() const {
  if (dims.d_h <= 0 || dims.d_l <= 0 || dims.d1 <= 0 || dims.d2 <= 0) {
    throw Error("scorer: dimensions must be positive");
  }
  if (dims.n_layers < 3) throw Error("scorer: n_layers must be >= 3");
  if (!std::isfinite(alpha_penalty) || alpha_penalty < 0.0) throw Error("scorer: alpha_penalty must be >= 0");
  const auto in = static_cast<std::size_t>(dims.input_dim());
  if (w1.rows() != in || w1.cols() != static_cast<std::size_t>(dims.d1) ||
      w2.rows() != static_cast<std::size_t>(dims.d1) || w2.cols() != static_cast<std::size_t>(dims.d2) ||
      w3.rows() != static_cast<std::size_t>(dims.d2) || w3.cols() != static_cast<std::size_t>(dims.n_outputs()) ||
      emb.rows() != static_cast<std::size_t>(dims.n_layers) + 1 || emb.cols() != static_cast<std::size_t>(dims.d_l)) {
    throw Error("scorer: weight shapes do not match dims");
  }
}

bool ScorerParams::all_finite() const {
  return w1.all_finite() && w2.all_finite() && w3.all_finite() && emb.all_finite() && std::isfinite(alpha_penalty);
}

CandidateScores score_candidates(const ScorerParams& params, std::span<const double> h, int layer,
                                 LayerState prev, ScorerCache* cache) {
  const ScorerDims& d = params.dims;
  if (h.size() != static_cast<std::size_t>(d.d_h)) {
    throw Error("score_candidates: hidden size " + std::to_string(h.size()) + " != d_h " + std::to_string(d.d_h));
  }
  if (layer < 1 || layer > d.n_layers - 1) throw Error("score_candidates: layer index out of range");
  for (double v : h) {
    if (!std::isfinite(v)) throw Error("score_candidates: non-finite hidden state");
  }

  ScorerCache local;
  ScorerCache& c = cache ? *cache : local;
  c.layer = layer;
  c.x.assign(h.begin(), h.end());
  const auto e0 = params.emb.row(static_cast<std::size_t>(layer));
  const auto e1 = params.emb.row(static_cast<std::size_t>(layer) + 1);
  c.x.insert(c.x.end(), e0.begin(), e0.end());
  c.x.insert(c.x.end(), e1.begin(), e1.end());

  c.z1 = vecmat(c.x, params.w1);
  c.a1.resize(c.z1.size());
  for (std::size_t i = 0; i < c.z1.size(); ++i) c.a1[i] = gelu(c.z1[i]);
  c.z2 = vecmat(c.a1, params.w2);
  c.a2.resize(c.z2.size());
  for (std::size_t i = 0; i < c.z2.size(); ++i) c.a2[i] = gelu(c.z2[i]);
  const Vector base = vecmat(c.a2, params.w3);

  CandidateScores out;
  const int prev_code = code(prev);
  for (LayerState s : kAllStates) {
    const double b = d.head == ScorerHead::kPerCandidate ? base[static_cast<std::size_t>(slot(s))] : base[0];
    out[s] = b - params.alpha_penalty * static_cast<double>(code(s) - prev_code);
  }
  return out;
}

void scorer_backward(const ScorerParams& params, const ScorerCache& c, const CandidateScores& dscores,
                     ScorerParams& grads) {
  const ScorerDims& d = params.dims;
  Vector dbase(static_cast<std::size_t>(d.n_outputs()), 0.0);
  if (d.head == ScorerHead::kPerCandidate) {
    for (std::size_t k = 0; k < 4; ++k) dbase[k] = dscores.values[k];
  } else {
    for (double g : dscores.values) dbase[0] += g;
  }

  const std::size_t n1 = c.a1.size(), n2 = c.a2.size(), no = dbase.size();
  // W3 and a2.
  Vector da2(n2, 0.0);
  for (std::size_t i = 0; i < n2; ++i) {
    for (std::size_t k = 0; k < no; ++k) {
      grads.w3(i, k) += c.a2[i] * dbase[k];
      da2[i] += params.w3(i, k) * dbase[k];
    }
  }
  Vector dz2(n2);
  for (std::size_t i = 0; i < n2; ++i) dz2[i] = da2[i] * gelu_grad(c.z2[i]);
  // W2 and a1.
  Vector da1(n1, 0.0);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      grads.w2(i, j) += c.a1[i] * dz2[j];
      da1[i] += params.w2(i, j) * dz2[j];
    }
  }
  Vector dz1(n1);
  for (std::size_t i = 0; i < n1; ++i) dz1[i] = da1[i] * gelu_grad(c.z1[i]);
  // W1 and the embedding part of x.
  const auto dh = static_cast<std::size_t>(d.d_h);
  const auto dl = static_cast<std::size_t>(d.d_l);
  auto g0 = grads.emb.row(static_cast<std::size_t>(c.layer));
  auto g1 = grads.emb.row(static_cast<std::size_t>(c.layer) + 1);
  for (std::size_t r = 0; r < c.x.size(); ++r) {
    double dx = 0.0;
    for (std::size_t j = 0; j < n1; ++j) {
      grads.w1(r, j) += c.x[r] * dz1[j];
      dx += params.w1(r, j) * dz1[j];
    }
    if (r >= dh + dl) {
      g1[r - dh - dl] += dx;
    } else if (r >= dh) {
      g0[r - dh] += dx;
    }
  }
}

Vector candidate_probabilities(const CandidateScores& scores, double tau, ActionSet allowed) {
  if (!(tau > 0.0)) throw Error("temperature must be > 0");
  std::array<double, 4> masked{};
  for (LayerState s : kAllStates) {
    const auto k = static_cast<std::size_t>(slot(s));
    masked[k] = allowed.allows(s) ? scores.values[k] : -std::numeric_limits<double>::infinity();
  }
  return softmax_with_temperature(masked, tau);
}

LayerState sample_next_state(const CandidateScores& scores, double tau, Rng& rng, ActionSet allowed) {
  const Vector p = candidate_probabilities(scores, tau, allowed);
  const double u = rng.uniform();
  double acc = 0.0;
  LayerState last = LayerState::kFull;
  for (LayerState s : kAllStates) {
    const double pk = p[static_cast<std::size_t>(slot(s))];
    if (pk <= 0.0) continue;
    last = s;
    acc += pk;
    if (u < acc) return s;
  }
  // Rounding left u beyond the accumulated mass: take the last allowed state.
  return last;
}

LayerState greedy_next_state(const CandidateScores& scores, ActionSet allowed) {
  std::optional<LayerState> best;
  for (LayerState s : kAllStates) {
    if (!allowed.allows(s)) continue;
    if (!std::isfinite(scores[s])) throw Error("greedy_next_state: non-finite score");
    // Iteration runs in increasing code order, so >= keeps the larger code on ties.
    if (!best || scores[s] >= scores[*best]) best = s;
  }
  return best.value_or(LayerState::kFull);
}

double temperature(double t, double tau0, double alpha_decay, double tau_min) {
  if (t < 0.0) throw Error("temperature: step must be >= 0");
  if (!(tau0 > 0.0) || alpha_decay < 0.0 || !(tau_min > 0.0)) throw Error("temperature: invalid schedule");
  return std::max(tau_min, tau0 * std::exp(-alpha_decay * t));
}

}  // namespace dash
