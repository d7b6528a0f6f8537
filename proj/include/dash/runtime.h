// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end dynamic inference. The synchronous runner scores the true
// output of layer i before choosing the state of layer i + 1. The
// asynchronous runner scores scale_i times the input of layer i on a second
// lane while layer i computes, and reads the decision at the layer boundary.

#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dash/features.h"
#include "dash/model.h"
#include "dash/policy.h"
#include "dash/trace.h"

namespace dash {

enum class PipelineMode { kSync, kAsync };
std::string to_string(PipelineMode m);
PipelineMode pipeline_mode_from_string(const std::string& s);

/// How the asynchronous decision lane is scheduled.
enum class LaneScheduling {
  /// Scoring runs on a worker thread concurrently with the layer.
  kConcurrent,
  /// Scoring runs inline when submitted (no overlap).
  kSerial,
};

struct RuntimeOptions {
  Readout readout = Readout::kLastToken;
  ActionSet actions = ActionSet::all();
  LaneScheduling scheduling = LaneScheduling::kConcurrent;
  /// How long the compute lane waits at a boundary for a pending decision;
  /// nullopt waits indefinitely.
  std::optional<std::chrono::nanoseconds> timeout;
  /// Called with the layer being decided; returning true discards that
  /// decision as if it had timed out.
  std::function<bool(int layer)> inject_timeout;
};

struct PipelineReport {
  PipelineMode mode = PipelineMode::kSync;
  DecisionTrace trace;
  /// sum cost(s_i) / (4 L).
  double realized_cost_ratio = 1.0;
  /// Per decision: time the compute lane spent on the decision (scoring in
  /// sync mode; submit plus boundary wait in async mode).
  std::vector<double> decision_overhead_seconds;
  int fallback_count = 0;
};

struct RunResult {
  /// One logit row per position.
  Matrix logits;
  PipelineReport report;
};

RunResult run_sync(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales,
                   std::span<const int> tokens, const RuntimeOptions& options = {});

RunResult run_async(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales,
                    std::span<const int> tokens, const RuntimeOptions& options = {});

/// Straight-line single-threaded version of run_async's decision rule
/// (scale_i times the readout of layer i's input), honouring
/// options.inject_timeout but not options.timeout.
DecisionTrace async_reference_trace(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales,
                                    std::span<const int> tokens, const RuntimeOptions& options = {});

/// States, and per step: layer, prev, chosen, scores and fallback flag, all
/// compared exactly. Timings are ignored.
bool same_decisions(const DecisionTrace& a, const DecisionTrace& b);

struct OverheadBenchmark {
  int runs = 0;
  double sync_mean_seconds = 0.0;
  double async_mean_seconds = 0.0;
  /// async / sync per-decision critical-path overhead.
  double ratio = 0.0;
};

/// Mean per-decision critical-path overhead of both runners over `runs`
/// executions on `inputs` (cycled).
OverheadBenchmark benchmark_decision_overhead(const ToyModel& model, const ScorerParams& scorer,
                                              const ScaleTable& scales, std::span<const std::vector<int>> inputs,
                                              int runs, const RuntimeOptions& options = {});

}  // namespace dash
