// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-step rewards for the decision policy, the REINFORCE gradient, and the
// scorer training loop.
//
//   r_i   = r_acc * omega_i + r_eff_i
//   r_eff = beta * (4 - s_{i+1})
//   omega = ((|S| - |S_<=l|) / |S|) * sigmoid(s_l - 4L / |S|)
//
// r_acc is shared by every step of an episode; omega and r_eff are per step.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dash/base_training.h"
#include "dash/rollout.h"

namespace dash {

/// Accuracy reward from perplexities: kDifference uses |ppl_full - ppl_skip|,
/// kLiteralSum the as-written |ppl_full + ppl_skip| (always strongly negative).
enum class PplRewardMode { kDifference, kLiteralSum };

std::string to_string(PplRewardMode m);
PplRewardMode ppl_reward_mode_from_string(const std::string& s);

struct RewardConfig {
  /// Efficiency weight. Zero disables the efficiency reward.
  double beta = 0.1;
  /// Weight of the policy-gradient loss in L_CE + lambda * L_RL.
  double lambda = 1.0;
  /// Perplexity tolerance.
  double epsilon = 1.0;
  PplRewardMode ppl_mode = PplRewardMode::kDifference;

  void validate() const;
};

double acc_reward_classification(int predicted, int gold);

/// (epsilon - |ppl_full -/+ ppl_skip|) / ppl_full. Throws for nonpositive
/// perplexities.
double acc_reward_perplexity(double ppl_full, double ppl_skip, const RewardConfig& cfg);

/// omega for layer l (1-based) of a complete path of length L.
double position_weight(std::span<const LayerState> states, int l, int n_layers);

double efficiency_reward(LayerState next, double beta);

StepReward step_reward(double r_acc, double omega, double r_eff);

/// Episode-level accuracy reward: +-1 for classification, the perplexity
/// reward against the full path otherwise.
double episode_acc_reward(const PathOutcome& outcome, int gold, const PathOutcome& full, const RewardConfig& cfg);

/// Fills the reward of every scorer-made step of `trace`.
void assign_rewards(DecisionTrace& trace, double r_acc, const RewardConfig& cfg);

/// L_RL = -sum_i (r_i - b_i) * log pi(s_{i+1} | h_i, s_i) under the current
/// params, using the temperature recorded in each step. Adds d(L_RL)/d(params)
/// into `grads` and returns L_RL. Steps flagged as fallbacks are ignored.
/// Throws if a step lacks rewards or recorded probabilities.
double reinforce_gradient(const ScorerParams& params, const DecisionTrace& trace, std::span<const Vector> features,
                          ActionSet actions, ScorerParams& grads, std::span<const double> baselines = {});

/// The objective reinforce_gradient differentiates (for finite differences).
double reinforce_loss(const ScorerParams& params, const DecisionTrace& trace, std::span<const Vector> features,
                      ActionSet actions, std::span<const double> baselines = {});

// ---------------------------------------------------------------------------
// Training

enum class TrainMode { kFrozen, kCoTrain };

struct ScorerTrainOptions {
  int steps = 300;
  int batch_size = 32;
  /// Plain SGD on the scorer.
  double lr = 1e-3;
  double clip_norm = 1.0;
  double tau0 = 1.0;
  double alpha_decay = 0.01;
  double tau_min = kDefaultTauMin;
  ActionSet actions = ActionSet::all();
  FeatureSource source = FeatureSource::kTrue;
  /// Subtract the batch-mean reward of each step position.
  bool baseline = true;
  TrainMode mode = TrainMode::kFrozen;
  /// Co-training only: Adam step size for the base model.
  double model_lr = 1e-4;
  std::uint64_t seed = 1;
  /// Abort when the mean |L_all| of the last 10 steps exceeds
  /// divergence_factor * max(divergence_floor, mean of the 10 steps
  /// divergence_window earlier).
  int divergence_window = 100;
  double divergence_factor = 10.0;
  double divergence_floor = 1.0;

  void validate() const;
};

struct TrainStepStats {
  int step = 0;
  double loss_ce = 0.0;
  double loss_rl = 0.0;
  double loss_all = 0.0;
  double mean_cost_ratio = 0.0;
  /// Accuracy for classification, negative perplexity otherwise.
  double quality = 0.0;
  double tau = 0.0;
  double mean_r_eff = 0.0;
};

/// One update of L_all = L_CE + lambda * L_RL on a batch of episodes
/// sampled at temperature `tau`. Frozen mode leaves the model untouched and
/// ignores `model`/`model_opt`; co-training additionally takes an Adam step
/// on the model's cross-entropy along the sampled paths (the envs must then
/// be LiveEnvs over `*model`).
TrainStepStats joint_train_step(ScorerParams& params, std::span<EpisodeEnv* const> batch, const RewardConfig& cfg,
                                const ScorerTrainOptions& options, double tau, Rng& rng, ToyModel* model = nullptr,
                                const ScaleTable* scales = nullptr, Adam* model_opt = nullptr);

/// Raised by the divergence guard.
class DivergenceError : public TrainingError {
 public:
  using TrainingError::TrainingError;
};

/// Tracks |L_all| and throws DivergenceError on runaway growth or a
/// non-finite loss.
class DivergenceGuard {
 public:
  DivergenceGuard(int window, double factor, double floor);
  void observe(int step, double loss_all);

 private:
  int window_;
  double factor_;
  double floor_;
  std::vector<double> history_;
};

struct ScorerTrainResult {
  ScorerParams params;
  std::vector<TrainStepStats> history;
};

/// Frozen-model training over a pool of environments (batches drawn with
/// replacement). Writes `step,loss_ce,loss_rl,mean_cost_ratio,accuracy,tau`
/// rows to `log` when given.
ScorerTrainResult train_scorer(const ScorerParams& init, std::span<const std::unique_ptr<EpisodeEnv>> pool,
                               const RewardConfig& cfg, const ScorerTrainOptions& options, std::ostream* log = nullptr);

/// Co-training over live model passes: every step rebuilds the batch
/// environments from the current model.
ScorerTrainResult co_train(const ScorerParams& init, ToyModel& model, const ScaleTable& scales,
                           std::span<const Sample> pool, Readout readout, const RewardConfig& cfg,
                           const ScorerTrainOptions& options, std::ostream* log = nullptr);

void write_train_log_header(std::ostream& os);
void write_train_log_row(std::ostream& os, const TrainStepStats& s);

/// Greedy evaluation over environments.
struct PolicyEvaluation {
  double quality = 0.0;
  double mean_cost_ratio = 0.0;
  std::vector<Path> paths;
  std::vector<PathOutcome> outcomes;
};

PolicyEvaluation evaluate_policy(const ScorerParams& params, std::span<const std::unique_ptr<EpisodeEnv>> envs,
                                 ActionSet actions, FeatureSource source);

}  // namespace dash
