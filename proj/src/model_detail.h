// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dash/model.h"
#include "dash/model_grad.h"

namespace dash::detail {

inline constexpr double kLayerNormEps = 1e-5;

/// Single implementation of a layer's arithmetic, shared by inference and
/// training so that both produce bit-identical activations. `tape` may be null.
Matrix run_layer(const ToyModel& model, const Matrix& x, int layer_index, LayerState state,
                 const ScaleTable& scales, FlopCounter* flops, LayerTape* tape);

/// y = gain * (x - mean) * rstd + bias, row-wise.
void layer_norm(const Matrix& x, const Vector& gain, const Vector& bias, Matrix& xhat, Vector& rstd,
                Matrix& y);

}  // namespace dash::detail
