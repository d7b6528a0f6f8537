// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pipeline stages wired together from a RunConfig, and the method-by-speedup
// comparison table: full model, similarity-ranked static skipping,
// random skipping at matched cost, the learned policy, and the compensation
// ladder (skip only without / with scaling, then adding int8, then int4).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dash/budget.h"
#include "dash/config.h"
#include "dash/oracle.h"
#include "dash/profiler.h"
#include "dash/rollout.h"

namespace dash {

/// Trains the base model for cfg.model / cfg.task.
ToyModel train_base(const RunConfig& cfg, BaseTrainReport* report = nullptr);

/// Calibration inputs drawn with cfg.calibration.seed.
std::vector<std::vector<int>> calibration_inputs(const RunConfig& cfg);
ScaleTable calibrate(const RunConfig& cfg, const ToyModel& model);

/// Training and evaluation samples (prefixes of the task splits).
struct SampleSplit {
  std::vector<Sample> train;
  std::vector<Sample> eval;
};
SampleSplit experiment_samples(const RunConfig& cfg);

/// Scorer trainer for seed index k: init and training seeds are offset by
/// 1000 * k so that budget retries never reuse another index's seed.
ScorerParams scorer_init(const RunConfig& cfg, int k = 0);
ScorerTrainOptions scorer_options(const RunConfig& cfg, int k = 0);

/// Environments for one scale table.
struct EnvSet {
  std::vector<std::unique_ptr<EpisodeEnv>> train;
  std::vector<std::unique_ptr<EpisodeEnv>> eval;
};
/// Tabulated when L <= 8, live otherwise.
EnvSet make_envs(const ToyModel& model, const ScaleTable& scales, const SampleSplit& samples, Readout readout);

/// A budget-fitted policy evaluated on held-out episodes.
struct FittedPolicy {
  BudgetPoint fit;
  PolicyEvaluation eval;
};
FittedPolicy fit_and_evaluate(const RunConfig& cfg, const EnvSet& envs, ActionSet actions, double target_speedup,
                              int k);

struct BenchRow {
  std::string method;
  /// Target speedup (1 for the full model).
  double target = 1.0;
  double achieved_ratio = 1.0;
  double quality = 0.0;
  std::uint64_t seed = 0;
  /// Learned rows only.
  double beta = 0.0;
  bool attained = true;
  double fit_ratio = 1.0;
};

struct BenchOptions {
  /// Compensation ladder at this speedup; nullopt skips it.
  std::optional<double> ladder_target = 1.67;
  bool frontier = true;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<PathEvaluation> frontier;
  std::vector<int> skip_order;
};

/// Method names used in BenchRow::method.
namespace method {
inline constexpr const char* kFull = "full";
inline constexpr const char* kStatic = "static_similarity";
inline constexpr const char* kRandom = "random_skip";
inline constexpr const char* kDash = "dash";
inline constexpr const char* kNoComp = "dash_skip_only";
inline constexpr const char* kScale = "dash_skip_scale";
inline constexpr const char* kScaleInt8 = "dash_skip_scale_int8";
inline constexpr const char* kScaleInt8Int4 = "dash_skip_scale_int8_int4";
}  // namespace method

/// Every speedup in cfg.targets for cfg.eval.n_seeds seeds. Progress lines
/// go to `log` when given.
BenchResult run_bench(const RunConfig& cfg, const ToyModel& model, const ScaleTable& scales,
                      const BenchOptions& options = {}, std::ostream* log = nullptr);

/// Smallest number of similarity-ranked skips whose cost ratio fits 1/target.
int static_skips_for(double target_speedup, int n_layers);

/// `method,target_ratio,achieved_ratio,quality,seed` rows.
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

}  // namespace dash
