// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/profiler.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dash/base_training.h"

namespace dash {
namespace {

// Per-sample layer similarity plus the per-position matrix.
using LayerMeasure = double (*)(const Matrix& in, const Matrix& out, std::span<double> per_token);

double pooled_cosine(const Matrix& in, const Matrix& out, std::span<double> per_token) {
  for (std::size_t t = 0; t < in.rows(); ++t) per_token[t] = cosine_similarity(in.row(t), out.row(t));
  return cosine_similarity(mean_rows(in), mean_rows(out));
}

double mean_token_cosine(const Matrix& in, const Matrix& out, std::span<double> per_token) {
  CompensatedSum s;
  for (std::size_t t = 0; t < in.rows(); ++t) {
    per_token[t] = cosine_similarity(in.row(t), out.row(t));
    s.add(per_token[t]);
  }
  return s.value() / static_cast<double>(in.rows());
}

SimilarityProfile profile(const ToyModel& model, std::span<const std::vector<int>> inputs, LayerMeasure measure) {
  if (inputs.empty()) throw Error("similarity profile: no inputs");
  const int L = model.n_layers();
  const Path full = full_path(L);
  const ScaleTable scales = ScaleTable::identity(L);
  SimilarityProfile p;
  p.n_layers = L;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const std::vector<Matrix> stream = model.residual_stream(inputs[s], full, scales);
    const std::size_t T = inputs[s].size();
    Matrix tok(static_cast<std::size_t>(L), T);
    std::vector<double> row(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const auto li = static_cast<std::size_t>(l);
      row[li] = std::clamp(measure(stream[li], stream[li + 1], tok.row(li)), -1.0, 1.0);
    }
    p.per_sample.push_back(std::move(row));
    p.per_token.push_back(std::move(tok));
    p.sample_ids.push_back(static_cast<int>(s));
  }
  const double n = static_cast<double>(inputs.size());
  p.mean.assign(static_cast<std::size_t>(L), 0.0);
  p.stddev.assign(static_cast<std::size_t>(L), 0.0);
  for (std::size_t l = 0; l < static_cast<std::size_t>(L); ++l) {
    CompensatedSum sum;
    for (const auto& r : p.per_sample) sum.add(r[l]);
    p.mean[l] = sum.value() / n;
    CompensatedSum sq;
    for (const auto& r : p.per_sample) sq.add((r[l] - p.mean[l]) * (r[l] - p.mean[l]));
    p.stddev[l] = std::sqrt(sq.value() / n);
  }
  return p;
}

}  // namespace

SimilarityProfile io_similarity_profile(const ToyModel& model, std::span<const std::vector<int>> inputs) {
  return profile(model, inputs, pooled_cosine);
}

SimilarityProfile adjacent_similarity_profile(const ToyModel& model, std::span<const std::vector<int>> inputs) {
  return profile(model, inputs, mean_token_cosine);
}

std::vector<int> skip_order(const SimilarityProfile& io) {
  std::vector<int> order(static_cast<std::size_t>(std::max(0, io.n_layers - 2)));
  std::iota(order.begin(), order.end(), 2);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return io.mean[static_cast<std::size_t>(a - 1)] > io.mean[static_cast<std::size_t>(b - 1)];
  });
  return order;
}

Path static_skip_path(std::span<const int> order, int k, int n_layers) {
  if (k < 0 || static_cast<std::size_t>(k) > order.size()) throw Error("static_skip_path: k out of range");
  Path p = full_path(n_layers);
  for (int j = 0; j < k; ++j) {
    const int layer = order[static_cast<std::size_t>(j)];
    if (layer < 2 || layer > n_layers - 1) throw Error("static_skip_path: boundary layer in skip order");
    p[static_cast<std::size_t>(layer - 1)] = LayerState::kSkip;
  }
  return p;
}

std::vector<SweepPoint> static_skip_sweep(const ToyModel& model, std::span<const Sample> eval_set, int max_skips) {
  const int L = model.n_layers();
  if (eval_set.empty()) throw Error("static_skip_sweep: empty evaluation set");
  if (max_skips < 0 || max_skips > L - 2) throw Error("static_skip_sweep: max_skips must be in [0, L - 2]");
  std::vector<std::vector<int>> inputs;
  inputs.reserve(eval_set.size());
  for (const Sample& s : eval_set) inputs.push_back(s.tokens);
  const std::vector<int> order = skip_order(io_similarity_profile(model, inputs));
  const ScaleTable identity = ScaleTable::identity(L);
  std::vector<SweepPoint> out;
  for (int k = 0; k <= max_skips; ++k) {
    Path p = static_skip_path(order, k, L);
    const double q = evaluate_quality(model, eval_set, p, identity);
    out.push_back(SweepPoint{k, q, std::move(p)});
  }
  return out;
}

void write_similarity_csv(std::ostream& os, const SimilarityProfile& profile) {
  os << "layer,sample_id,similarity\n";
  for (int l = 0; l < profile.n_layers; ++l) {
    for (std::size_t s = 0; s < profile.per_sample.size(); ++s) {
      os << l + 1 << ',' << profile.sample_ids[s] << ',' << profile.per_sample[s][static_cast<std::size_t>(l)]
         << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> sweep) {
  os << "k,accuracy\n";
  for (const auto& p : sweep) os << p.k << ',' << p.quality << '\n';
}

}  // namespace dash
