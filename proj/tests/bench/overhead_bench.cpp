// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-decision critical-path overhead of the asynchronous runner relative
// to the synchronous one. Needs two hardware threads; exits 77 (skipped)
// otherwise.

#include <cstdio>
#include <thread>

#include "dash/experiment.h"
#include "dash/runtime.h"

using namespace dash;

int main() {
  constexpr double kMaxRatio = 0.20;
  const unsigned cores = std::thread::hardware_concurrency();
  if (cores < 2) {
    std::printf("SKIP decision overhead: %u hardware thread(s), the decision lane cannot overlap\n", cores);
    return 77;
  }
  const RunConfig cfg = RunConfig::defaults();
  const ToyModel model = ToyModel::init(cfg.model);
  const ScaleTable scales = ScaleTable::identity(model.n_layers());
  const ScorerParams scorer = scorer_init(cfg);
  std::vector<std::vector<int>> inputs;
  for (const auto& s : experiment_samples(cfg).eval) inputs.push_back(s.tokens);
  RuntimeOptions opts;
  opts.actions = ActionSet::of({LayerState::kFull});
  benchmark_decision_overhead(model, scorer, scales, inputs, 50, opts);
  const OverheadBenchmark b = benchmark_decision_overhead(model, scorer, scales, inputs, 2000, opts);
  const bool pass = b.ratio < kMaxRatio;
  std::printf("%s decision overhead: sync %.3g s, async %.3g s per decision, ratio %.3f (limit %.2f)\n",
              pass ? "PASS" : "FAIL", b.sync_mean_seconds, b.async_mean_seconds, b.ratio, kMaxRatio);
  return pass ? 0 : 1;
}
