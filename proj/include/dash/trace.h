// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "dash/layer_state.h"

namespace dash {

/// Scores for the four candidate states, indexed by slot(state).
struct CandidateScores {
  std::array<double, 4> values{};

  double operator[](LayerState s) const { return values[static_cast<std::size_t>(slot(s))]; }
  double& operator[](LayerState s) { return values[static_cast<std::size_t>(slot(s))]; }
  std::span<const double> span() const { return values; }
  friend bool operator==(const CandidateScores&, const CandidateScores&) = default;
};

/// r = r_acc * omega + r_eff.
struct StepReward {
  double r_acc = 0.0;
  double omega = 0.0;
  double r_eff = 0.0;
  double r = 0.0;
};

/// One decision: the state chosen for `layer`, made after layer - 1 ran in
/// state `prev`.
struct DecisionStep {
  int layer = 0;
  LayerState prev = LayerState::kFull;
  LayerState chosen = LayerState::kFull;
  CandidateScores scores;
  /// Sampling distribution at decision time, indexed by slot. Empty for
  /// forced or fallback decisions.
  std::vector<double> probs;
  double tau = 1.0;
  /// True when the state was not produced by the scorer (timeout fallback).
  bool fallback = false;
  std::optional<StepReward> reward;
  double score_seconds = 0.0;
};

struct DecisionTrace {
  Path states;
  std::vector<DecisionStep> steps;
  /// Wall time spent computing each layer (index l - 1).
  std::vector<double> layer_seconds;

  bool rewarded() const;
};

}  // namespace dash
