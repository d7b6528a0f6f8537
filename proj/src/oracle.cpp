// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/oracle.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dash/base_training.h"

namespace dash {

std::vector<Path> enumerate_paths(int n_layers) {
  if (n_layers < 3) throw Error("enumerate_paths: need at least 3 layers");
  if (n_layers > kMaxEnumerableLayers) {
    throw Error("enumerate_paths: L = " + std::to_string(n_layers) +
                " has too many paths to enumerate; use random_skip_baseline's sampling mode");
  }
  const int free = n_layers - 2;
  std::size_t count = 1;
  for (int i = 0; i < free; ++i) count *= 4;
  std::vector<Path> out;
  out.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    Path p = full_path(n_layers);
    std::size_t rest = m;
    // Most significant digit first so that the order is lexicographic in slots.
    for (int j = free; j >= 1; --j) {
      p[static_cast<std::size_t>(j)] = kAllStates[rest % 4];
      rest /= 4;
    }
    out.push_back(std::move(p));
  }
  return out;
}

PathEvaluation evaluate_path(const ToyModel& model, std::span<const LayerState> path, const ScaleTable& scales,
                             std::span<const Sample> eval_set) {
  if (eval_set.empty()) throw Error("evaluate_path: empty evaluation set");
  PathEvaluation e;
  e.path.assign(path.begin(), path.end());
  e.cost = path_cost(path);
  e.quality = evaluate_quality(model, eval_set, path, scales);
  const Path full = full_path(model.n_layers());
  e.distance = e.path == full ? 0.0 : evaluate_quality(model, eval_set, full, scales) - e.quality;
  return e;
}

std::vector<PathEvaluation> pareto_frontier(std::span<const PathEvaluation> evals) {
  if (evals.empty()) throw Error("pareto_frontier: no evaluations");
  auto dominates = [](const PathEvaluation& a, const PathEvaluation& b) {
    return a.cost <= b.cost && a.quality >= b.quality && (a.cost < b.cost || a.quality > b.quality);
  };
  std::vector<PathEvaluation> out;
  for (const auto& c : evals) {
    const bool dominated = std::any_of(evals.begin(), evals.end(), [&](const auto& o) { return dominates(o, c); });
    if (!dominated) out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
  return out;
}

std::optional<double> frontier_quality_at(std::span<const PathEvaluation> frontier, double cost) {
  std::optional<double> best;
  for (const auto& e : frontier) {
    if (e.cost <= cost && (!best || e.quality > *best)) best = e.quality;
  }
  return best;
}

namespace {

BaselineResult summarize(std::vector<double> q) {
  BaselineResult r;
  CompensatedSum s;
  for (double v : q) s.add(v);
  r.mean = s.value() / static_cast<double>(q.size());
  if (q.size() > 1) {
    CompensatedSum ss;
    for (double v : q) ss.add((v - r.mean) * (v - r.mean));
    r.stddev = std::sqrt(ss.value() / static_cast<double>(q.size() - 1));
  }
  r.qualities = std::move(q);
  return r;
}

}  // namespace

BaselineResult random_skip_baseline(const PathQualityFn& quality, int n_layers, double target_cost, int trials,
                                    Rng& rng) {
  if (trials <= 0) throw Error("random_skip_baseline: trials must be positive");
  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(trials));
  if (n_layers <= kMaxEnumerableLayers) {
    std::vector<Path> near;
    for (auto& p : enumerate_paths(n_layers)) {
      if (std::abs(path_cost(p) - target_cost) <= 1.0) near.push_back(std::move(p));
    }
    if (near.empty()) throw Error("random_skip_baseline: no admissible path within 1 cost unit of the target");
    for (int t = 0; t < trials; ++t) q.push_back(quality(near[rng.index(near.size())]));
    return summarize(std::move(q));
  }
  if (target_cost < 7.0 || target_cost > 4.0 * n_layers + 1.0) {
    throw Error("random_skip_baseline: no admissible path within 1 cost unit of the target");
  }
  constexpr long kMaxAttempts = 10'000'000;
  long attempts = 0;
  Path p = full_path(n_layers);
  while (static_cast<int>(q.size()) < trials) {
    if (++attempts > kMaxAttempts) throw Error("random_skip_baseline: rejection sampling found too few paths");
    for (int j = 1; j + 1 < n_layers; ++j) p[static_cast<std::size_t>(j)] = kAllStates[rng.index(4)];
    if (std::abs(path_cost(p) - target_cost) <= 1.0) q.push_back(quality(p));
  }
  return summarize(std::move(q));
}

BaselineResult random_skip_baseline(const ToyModel& model, const ScaleTable& scales, std::span<const Sample> eval_set,
                                    double target_cost, int trials, Rng& rng) {
  return random_skip_baseline(
      [&](const Path& p) { return evaluate_quality(model, eval_set, p, scales); }, model.n_layers(), target_cost,
      trials, rng);
}

void write_frontier_csv(std::ostream& os, std::span<const PathEvaluation> frontier) {
  os << "cost,quality,path\n";
  for (const auto& e : frontier) os << e.cost << ',' << e.quality << ',' << path_string(e.path) << '\n';
}

}  // namespace dash
