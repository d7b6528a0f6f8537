// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scoring network for next-layer execution states.
//
//   x     = [h ; E(l) ; E(l + 1)]
//   base  = W3^T gelu(W2^T gelu(W1^T x))
//   score = base[s] - alpha * (code(s) - code(s_prev))
//
// W3 has one column per candidate state so that the base score depends on
// the candidate. The single-column head (one base score shared by all
// candidates) is kept for ablations; there the choice is driven by the
// penalty alone.

#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "dash/layer_state.h"
#include "dash/numerics.h"
#include "dash/trace.h"

namespace dash {

enum class ScorerHead { kPerCandidate, kShared };

std::string to_string(ScorerHead head);
ScorerHead scorer_head_from_string(const std::string& s);

struct ScorerDims {
  int d_h = 32;
  int d_l = 16;
  int d1 = 64;
  int d2 = 64;
  int n_layers = 6;
  ScorerHead head = ScorerHead::kPerCandidate;

  int input_dim() const { return d_h + 2 * d_l; }
  int n_outputs() const { return head == ScorerHead::kPerCandidate ? 4 : 1; }
  friend bool operator==(const ScorerDims&, const ScorerDims&) = default;
};

struct ScorerParams {
  ScorerDims dims;
  Matrix w1;   // input_dim x d1
  Matrix w2;   // d1 x d2
  Matrix w3;   // d2 x n_outputs
  Matrix emb;  // (n_layers + 1) x d_l, row l is the embedding of layer l
  double alpha_penalty = 0.0;

  /// Zero-mean uniform weights with bound 1/sqrt(fan_in); embeddings
  /// uniform in [-1, 1].
  static ScorerParams init(const ScorerDims& dims, double alpha_penalty, std::uint64_t seed);
  /// Same shapes, all zero (gradient accumulator).
  static ScorerParams zeros_like(const ScorerParams& p);

  void validate() const;
  bool all_finite() const;
  friend bool operator==(const ScorerParams&, const ScorerParams&) = default;
};

/// Applies fn(a_tensor, b_tensor) to matching trainable tensors.
template <typename A, typename B, typename Fn>
void for_each_scorer_tensor(A& a, B& b, Fn&& fn) {
  fn(a.w1.data(), b.w1.data());
  fn(a.w2.data(), b.w2.data());
  fn(a.w3.data(), b.w3.data());
  fn(a.emb.data(), b.emb.data());
}

/// Intermediate values kept for backpropagation.
struct ScorerCache {
  Vector x, z1, a1, z2, a2;
  int layer = 0;
};

/// Scores the candidates for layer l + 1 given hidden h and the state of
/// layer l. Requires 1 <= l <= n_layers - 1 and h.size() == d_h.
CandidateScores score_candidates(const ScorerParams& params, std::span<const double> h, int layer,
                                 LayerState prev, ScorerCache* cache = nullptr);

/// Accumulates d(objective)/d(params) into `grads` given d(objective)/d(score).
void scorer_backward(const ScorerParams& params, const ScorerCache& cache, const CandidateScores& dscores,
                     ScorerParams& grads);

/// Softmax over the allowed candidates at temperature tau, indexed by slot;
/// disallowed states get probability 0.
Vector candidate_probabilities(const CandidateScores& scores, double tau, ActionSet allowed = ActionSet::all());

/// Draws a state from candidate_probabilities. Throws for tau <= 0.
LayerState sample_next_state(const CandidateScores& scores, double tau, Rng& rng,
                             ActionSet allowed = ActionSet::all());

/// Argmax over the allowed candidates; ties go to the larger state code.
LayerState greedy_next_state(const CandidateScores& scores, ActionSet allowed = ActionSet::all());

inline constexpr double kDefaultTauMin = 0.05;

/// tau0 * exp(-alpha_decay * t), floored at tau_min.
double temperature(double t, double tau0, double alpha_decay, double tau_min = kDefaultTauMin);

}  // namespace dash
