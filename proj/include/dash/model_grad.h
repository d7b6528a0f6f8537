// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Recorded forward pass and reverse-mode gradients for ToyModel. Quantized
// layers use a straight-through estimator: gradients flow through the
// fake-quantizers as identity and into the full-precision master weights.

#pragma once

#include <span>
#include <vector>

#include "dash/model.h"
#include "dash/tasks.h"

namespace dash {

struct LayerTape {
  LayerState state = LayerState::kFull;
  double scale = 1.0;
  // attention block
  Matrix xhat1;
  Vector rstd1;
  Matrix a_used;  // matmul input (quantized in low-bit states)
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, T x T (causal)
  Matrix o_used;
  // feed-forward block
  Matrix xhat2;
  Vector rstd2;
  Matrix b_used;
  Matrix u;
  Matrix g_used;
};

struct ForwardTape {
  std::vector<int> tokens;
  std::vector<LayerTape> layers;
  Matrix xhatf;
  Vector rstdf;
  Matrix hf;
};

/// Identical arithmetic to ToyModel::forward_with_path, additionally
/// recording what backward() needs.
Matrix forward_taped(const ToyModel& model, std::span<const int> tokens,
                     std::span<const LayerState> path, const ScaleTable& scales, ForwardTape& tape);

/// Accumulates d(loss)/d(weights) into `grads` given d(loss)/d(logits).
void backward(const ToyModel& model, const ForwardTape& tape, const Matrix& dlogits, ModelWeights& grads);

/// Mean cross-entropy for a sample: last position vs label for
/// classification, every next-token position for language modelling.
/// Writes d(loss)/d(logits) into `dlogits`.
double sample_loss(const Matrix& logits, const Sample& sample, Matrix& dlogits);

}  // namespace dash
