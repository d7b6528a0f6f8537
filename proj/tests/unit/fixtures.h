// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small untrained models and inputs shared by the unit tests.

#pragma once

#include <vector>

#include "dash/model.h"
#include "dash/policy.h"
#include "dash/tasks.h"

namespace dash::testing {

inline ModelConfig tiny_config(std::uint64_t seed = 3) {
  ModelConfig c;
  c.n_layers = 5;
  c.d_model = 8;
  c.n_heads = 2;
  c.d_ff = 16;
  c.vocab_size = 16;
  c.max_seq_len = 16;
  c.seed = seed;
  return c;
}

inline ToyModel tiny_model(std::uint64_t seed = 3) { return ToyModel::init(tiny_config(seed)); }

inline std::vector<int> random_tokens(Rng& rng, int length, int vocab = 16) {
  std::vector<int> t(static_cast<std::size_t>(length));
  for (int& v : t) v = static_cast<int>(rng.index(static_cast<std::size_t>(vocab)));
  return t;
}

inline ScorerDims dims_for(const ToyModel& m, ScorerHead head = ScorerHead::kPerCandidate) {
  ScorerDims d;
  d.d_h = m.config().d_model;
  d.d_l = 4;
  d.d1 = 8;
  d.d2 = 8;
  d.n_layers = m.n_layers();
  d.head = head;
  return d;
}

/// Recall samples sized for tiny_config.
inline std::vector<Sample> recall_samples(int n, std::uint64_t seed) {
  TaskSpec spec;
  spec.length = 4;
  return sample_task(spec, n, seed);
}

inline ScaleTable random_scales(int n_layers, Rng& rng) {
  std::vector<double> s(static_cast<std::size_t>(n_layers));
  for (double& v : s) v = rng.uniform(0.7, 1.6);
  return ScaleTable(std::move(s), 1, "test");
}

}  // namespace dash::testing
