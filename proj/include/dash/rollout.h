// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Episode environments: what the decision policy sees while walking through
// the layers of one input, and what the finished path scores.
//
// LiveEnv runs the model on demand and caches hidden states per prefix.
// TabulatedEnv precomputes the whole prefix tree of a sample once so that
// many policy rollouts over a frozen model cost no model arithmetic. Both
// call the same layer code and therefore agree bit for bit.

#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dash/features.h"
#include "dash/model.h"
#include "dash/policy.h"
#include "dash/tasks.h"

namespace dash {

/// Which vector the scorer reads when deciding layer i + 1 after layer i.
/// kTrue: the output of layer i. kApprox: scale_i times the input of layer i
/// (available before layer i finishes).
enum class FeatureSource { kTrue, kApprox };

struct PathOutcome {
  bool classification = false;
  /// Classification: argmax at the last position and whether it is right.
  int predicted = -1;
  bool correct = false;
  /// Cross-entropy of the label (classification) or summed next-token NLL.
  double nll_sum = 0.0;
  int n_predicted = 0;

  double mean_nll() const { return n_predicted > 0 ? nll_sum / n_predicted : 0.0; }
  /// exp(mean NLL).
  double perplexity() const;
};

PathOutcome score_logits(const Matrix& logits, const Sample& sample);

class EpisodeEnv {
 public:
  virtual ~EpisodeEnv() = default;
  virtual int n_layers() const = 0;
  virtual const Sample& sample() const = 0;
  /// Scorer input for deciding layer prefix.size() + 1, where prefix holds
  /// the states of layers 1..i (1 <= i <= L - 2, prefix[0] == 4).
  virtual Vector feature(std::span<const LayerState> prefix, FeatureSource source) = 0;
  /// Result of running the complete path.
  virtual PathOutcome outcome(std::span<const LayerState> path) = 0;
};

class LiveEnv final : public EpisodeEnv {
 public:
  /// Keeps references to model and scales; both must outlive the env.
  LiveEnv(const ToyModel& model, const ScaleTable& scales, Sample sample, Readout readout);

  int n_layers() const override { return model_.n_layers(); }
  const Sample& sample() const override { return sample_; }
  Vector feature(std::span<const LayerState> prefix, FeatureSource source) override;
  PathOutcome outcome(std::span<const LayerState> path) override;

  /// Hidden state after running layers 1..prefix.size() in the given states.
  const Matrix& hidden(std::span<const LayerState> prefix);

 private:
  const ToyModel& model_;
  const ScaleTable& scales_;
  Sample sample_;
  Readout readout_;
  std::map<std::string, Matrix> cache_;
};

class TabulatedEnv final : public EpisodeEnv {
 public:
  /// Enumerates every admissible path of the sample. Requires L <= 8.
  TabulatedEnv(const ToyModel& model, const ScaleTable& scales, Sample sample, Readout readout);

  int n_layers() const override { return n_layers_; }
  const Sample& sample() const override { return sample_; }
  Vector feature(std::span<const LayerState> prefix, FeatureSource source) override;
  PathOutcome outcome(std::span<const LayerState> path) override;

 private:
  static std::size_t prefix_code(std::span<const LayerState> states);

  int n_layers_;
  Sample sample_;
  // [depth i - 1][code of states 2..i]
  std::vector<std::vector<Vector>> true_features_;
  std::vector<std::vector<Vector>> approx_features_;
  std::vector<PathOutcome> outcomes_;
};

/// Builds one TabulatedEnv per sample.
std::vector<std::unique_ptr<EpisodeEnv>> tabulate(const ToyModel& model, const ScaleTable& scales,
                                                  std::span<const Sample> samples, Readout readout);
std::vector<std::unique_ptr<EpisodeEnv>> live_envs(const ToyModel& model, const ScaleTable& scales,
                                                   std::span<const Sample> samples, Readout readout);

/// How the policy acts during a rollout.
struct RolloutPolicy {
  ActionSet actions = ActionSet::all();
  FeatureSource source = FeatureSource::kTrue;
  bool greedy = true;
  double tau = 1.0;
};

struct Episode {
  DecisionTrace trace;
  /// Scorer inputs, one per decision step.
  std::vector<Vector> features;
  PathOutcome outcome;
};

/// Walks layers 1..L: layer 1 and L run at full precision, layers 2..L-1
/// are chosen by the scorer. `rng` is required when sampling.
Episode rollout(const ScorerParams& params, EpisodeEnv& env, const RolloutPolicy& policy, Rng* rng = nullptr);

/// Aggregate quality over episodes: accuracy for classification, negative
/// corpus perplexity otherwise.
double aggregate_quality(std::span<const PathOutcome> outcomes);

}  // namespace dash
