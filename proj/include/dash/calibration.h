// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Offline estimation of skip-compensation factors. For every layer the
// factor is the token-count-weighted mean of |Y_t| / |X_t| over a
// calibration set, where X_t / Y_t are the residual-stream vectors entering
// and leaving the layer for token t under a full-precision forward pass.

#pragma once

#include <span>
#include <vector>

#include "dash/model.h"
#include "dash/scale_table.h"

namespace dash {

inline constexpr int kDefaultCalibrationSize = 128;

/// Streams (input, output) activation pairs per layer and reduces them to a
/// ScaleTable. Zero-norm input tokens are skipped and reported as warnings.
class ScaleAccumulator {
 public:
  explicit ScaleAccumulator(int n_layers);
  /// x, y: T x d activations entering / leaving `layer_index` (1-based).
  void add(int layer_index, const Matrix& x, const Matrix& y);
  ScaleTable finish(std::size_t calib_size, std::string fingerprint) const;

 private:
  std::vector<CompensatedSum> sums_;
  std::vector<long> counts_;
  std::vector<long> skipped_;
};

/// Throws dash::Error for an empty calibration set, or when every token of
/// some layer had a zero-norm input.
ScaleTable compute_scale_table(const ToyModel& model, std::span<const std::vector<int>> calib);

/// Order-independent fingerprint of a calibration set.
std::string calibration_fingerprint(std::span<const std::vector<int>> calib);

}  // namespace dash
