// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force references for small models: every admissible path, its cost
// and quality, the cost/quality Pareto frontier, and the random-skip
// baseline.

#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dash/model.h"
#include "dash/tasks.h"

namespace dash {

inline constexpr int kMaxEnumerableLayers = 8;

struct PathEvaluation {
  Path path;
  int cost = 0;
  /// Accuracy (classification) or negative perplexity; higher is better.
  double quality = 0.0;
  /// quality(full path) - quality(path).
  double distance = 0.0;
};

/// Every path of length L with first and last layer in state 4, in
/// lexicographic slot order. Throws for L > 8 (use sampling instead).
std::vector<Path> enumerate_paths(int n_layers);

/// Quality of `path` over `eval_set`, its cost, and its distance from the
/// full path.
PathEvaluation evaluate_path(const ToyModel& model, std::span<const LayerState> path, const ScaleTable& scales,
                             std::span<const Sample> eval_set);

/// Evaluations not dominated by another (lower-or-equal cost and
/// higher-or-equal quality, strictly better in one), sorted by cost.
std::vector<PathEvaluation> pareto_frontier(std::span<const PathEvaluation> evals);

/// Best frontier quality at cost <= `cost`; nullopt when none.
std::optional<double> frontier_quality_at(std::span<const PathEvaluation> frontier, double cost);

struct BaselineResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> qualities;
};

/// Quality of a path; lets callers plug in cached evaluations.
using PathQualityFn = std::function<double(const Path&)>;

/// Uniform over admissible paths whose cost is within +-1 unit of
/// `target_cost`; mean and standard deviation of quality over `trials`
/// draws. Enumerates for L <= 8, rejection-samples above. Throws when no
/// admissible path is that close to the target.
BaselineResult random_skip_baseline(const PathQualityFn& quality, int n_layers, double target_cost, int trials,
                                    Rng& rng);
BaselineResult random_skip_baseline(const ToyModel& model, const ScaleTable& scales, std::span<const Sample> eval_set,
                                    double target_cost, int trials, Rng& rng);

/// `cost,quality,path` rows.
void write_frontier_csv(std::ostream& os, std::span<const PathEvaluation> frontier);

}  // namespace dash
