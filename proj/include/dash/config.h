// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Everything a pipeline run depends on, loadable from a JSON file. Missing
// keys keep their defaults; unknown keys are rejected.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dash/base_training.h"
#include "dash/budget.h"
#include "dash/calibration.h"
#include "dash/model.h"
#include "dash/policy.h"
#include "dash/rewards.h"
#include "dash/tasks.h"

namespace dash {

struct CalibrationConfig {
  int size = kDefaultCalibrationSize;
  std::uint64_t seed = 99;
};

struct ScorerConfig {
  int d_l = 16;
  int d1 = 64;
  int d2 = 64;
  ScorerHead head = ScorerHead::kPerCandidate;
  double alpha_penalty = 0.0;
  Readout readout = Readout::kLastToken;
  std::uint64_t init_seed = 1;
};

struct EvalConfig {
  /// Training episodes (taken from the task's training split).
  int n_train = 256;
  /// Evaluation episodes (taken from the validation split).
  int n_eval = 256;
  /// Independent repetitions of scorer training and random baselines.
  int n_seeds = 5;
  int random_trials = 200;
  std::uint64_t seed = 11;
};

struct RunConfig {
  ModelConfig model;
  TaskSpec task;
  BaseTrainOptions base_train;
  CalibrationConfig calibration;
  ScorerConfig scorer;
  RewardConfig reward;
  ScorerTrainOptions scorer_train;
  bool budget_enabled = true;
  BudgetOptions budget;
  EvalConfig eval;
  std::vector<double> targets{1.33, 1.67, 2.0};
  /// Speedup used by train-scorer / infer when no --target-ratio is given.
  double target = 1.67;
  std::string checkpoint = "dash_ckpt.json";
  std::string out_dir = "dash_out";

  /// Defaults tuned for the toy setting: higher scorer learning rate and
  /// faster temperature decay than the library defaults.
  static RunConfig defaults();

  ScorerDims scorer_dims() const;
  /// Checks every section; throws dash::Error with the offending key.
  void validate() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON (sorted keys, every field present).
std::string config_to_json_text(const RunConfig& cfg);
/// 16 hex digits identifying the canonical JSON.
std::string config_hash(const RunConfig& cfg);

}  // namespace dash
