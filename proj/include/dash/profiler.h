// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Layer redundancy measurements on a full-precision forward pass: how much
// each layer changes the residual stream, and how accuracy falls off when
// the most input/output-similar layers are skipped outright.

#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dash/model.h"
#include "dash/tasks.h"

namespace dash {

struct SimilarityProfile {
  int n_layers = 0;
  /// Per layer, over samples.
  std::vector<double> mean;
  std::vector<double> stddev;
  /// [sample][layer] aggregated similarity.
  std::vector<std::vector<double>> per_sample;
  /// [sample] (layer x token) per-position cosine similarities.
  std::vector<Matrix> per_token;
  std::vector<int> sample_ids;
};

/// Layer l: cosine between the mean-pooled hidden state entering layer l and
/// the one leaving it.
SimilarityProfile io_similarity_profile(const ToyModel& model, std::span<const std::vector<int>> inputs);

/// Boundary i (i = 1..L): cosine between the hidden states entering layer i
/// and layer i + 1 (the final residual output for i = L), computed per
/// position and averaged over positions.
SimilarityProfile adjacent_similarity_profile(const ToyModel& model, std::span<const std::vector<int>> inputs);

struct SweepPoint {
  int k = 0;
  /// Accuracy (classification) or negative perplexity.
  double quality = 0.0;
  Path path;
};

/// Decidable layers (2..L-1) ordered by descending mean io similarity; ties
/// keep the lower layer first.
std::vector<int> skip_order(const SimilarityProfile& io);

/// Full path with the first k layers of `order` set to state 0.
Path static_skip_path(std::span<const int> order, int k, int n_layers);

/// For k = 0..max_skips, skips the k most io-similar decidable layers with
/// no compensation (identity scales) and evaluates on `eval_set`. The
/// similarity ranking is measured on the eval inputs.
std::vector<SweepPoint> static_skip_sweep(const ToyModel& model, std::span<const Sample> eval_set, int max_skips);

/// `layer,sample_id,similarity` rows (1-based layers).
void write_similarity_csv(std::ostream& os, const SimilarityProfile& profile);
/// `k,accuracy` rows.
void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> sweep);

}  // namespace dash
