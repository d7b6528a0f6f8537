// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/rewards.h"

#include <cmath>
#include <ostream>
#include <sstream>

#include "dash/model_grad.h"

namespace dash {

std::string to_string(PplRewardMode m) { return m == PplRewardMode::kDifference ? "difference" : "literal_sum"; }

PplRewardMode ppl_reward_mode_from_string(const std::string& s) {
  if (s == "difference") return PplRewardMode::kDifference;
  if (s == "literal_sum" || s == "literal") return PplRewardMode::kLiteralSum;
  throw Error("unknown perplexity reward mode '" + s + "'");
}

void RewardConfig::validate() const {
  if (!std::isfinite(beta) || beta < 0.0) throw Error("reward: beta must be >= 0");
  if (!std::isfinite(lambda) || lambda < 0.0) throw Error("reward: lambda must be >= 0");
  if (!std::isfinite(epsilon) || epsilon <= 0.0) throw Error("reward: epsilon must be > 0");
}

double acc_reward_classification(int predicted, int gold) { return predicted == gold ? 1.0 : -1.0; }

double acc_reward_perplexity(double ppl_full, double ppl_skip, const RewardConfig& cfg) {
  if (!(ppl_full > 0.0) || !(ppl_skip > 0.0)) throw Error("acc_reward_perplexity: perplexities must be > 0");
  const double gap = cfg.ppl_mode == PplRewardMode::kDifference ? std::abs(ppl_full - ppl_skip)
                                                                  : std::abs(ppl_full + ppl_skip);
  return (cfg.epsilon - gap) / ppl_full;
}

double position_weight(std::span<const LayerState> states, int l, int n_layers) {
  if (states.size() != static_cast<std::size_t>(n_layers)) throw Error("position_weight: trace length != L");
  if (l < 1 || l > n_layers) throw Error("position_weight: layer index out of range");
  double total = 0.0, upto = 0.0;
  for (int i = 1; i <= n_layers; ++i) {
    const double s = code(states[static_cast<std::size_t>(i - 1)]);
    total += s;
    if (i <= l) upto += s;
  }
  if (total <= 0.0) throw Error("position_weight: trace executes no layer");
  const double s_max = 4.0 * n_layers;
  const double s_l = code(states[static_cast<std::size_t>(l - 1)]);
  return ((total - upto) / total) * sigmoid(s_l - s_max / total);
}

double efficiency_reward(LayerState next, double beta) { return beta * (4.0 - code(next)); }

StepReward step_reward(double r_acc, double omega, double r_eff) {
  return StepReward{r_acc, omega, r_eff, r_acc * omega + r_eff};
}

double episode_acc_reward(const PathOutcome& outcome, int gold, const PathOutcome& full, const RewardConfig& cfg) {
  if (outcome.classification) return acc_reward_classification(outcome.predicted, gold);
  return acc_reward_perplexity(full.perplexity(), outcome.perplexity(), cfg);
}

void assign_rewards(DecisionTrace& trace, double r_acc, const RewardConfig& cfg) {
  const int L = static_cast<int>(trace.states.size());
  for (auto& step : trace.steps) {
    // The step deciding layer i + 1 is weighted at the current layer i.
    const double omega = position_weight(trace.states, step.layer - 1, L);
    step.reward = step_reward(r_acc, omega, efficiency_reward(step.chosen, cfg.beta));
  }
}

namespace {

double rl_objective(const ScorerParams& params, const DecisionTrace& trace, std::span<const Vector> features,
                    ActionSet actions, std::span<const double> baselines, ScorerParams* grads) {
  if (features.size() != trace.steps.size()) throw Error("reinforce_gradient: features and steps are not aligned");
  if (!baselines.empty() && baselines.size() != trace.steps.size()) {
    throw Error("reinforce_gradient: baselines and steps are not aligned");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const DecisionStep& st = trace.steps[i];
    if (st.fallback) continue;
    if (!st.reward) throw Error("reinforce_gradient: step without reward");
    if (st.probs.size() != 4) throw Error("reinforce_gradient: step without recorded probabilities");
    const double adv = st.reward->r - (baselines.empty() ? 0.0 : baselines[i]);
    ScorerCache cache;
    const CandidateScores scores =
        score_candidates(params, features[i], st.layer - 1, st.prev, grads ? &cache : nullptr);
    const Vector p = candidate_probabilities(scores, st.tau, actions);
    const auto a = static_cast<std::size_t>(slot(st.chosen));
    if (p[a] <= 0.0) throw Error("reinforce_gradient: chosen state has zero probability");
    loss -= adv * std::log(p[a]);
    if (grads && adv != 0.0) {
      CandidateScores d;
      for (std::size_t k = 0; k < 4; ++k) d.values[k] = -adv * ((k == a ? 1.0 : 0.0) - p[k]) / st.tau;
      scorer_backward(params, cache, d, *grads);
    }
  }
  return loss;
}

double scorer_sq_norm(const ScorerParams& g) {
  double s = 0.0;
  for (const Matrix* m : {&g.w1, &g.w2, &g.w3, &g.emb}) {
    for (double v : m->data()) s += v * v;
  }
  return s;
}

}  // namespace

double reinforce_gradient(const ScorerParams& params, const DecisionTrace& trace, std::span<const Vector> features,
                          ActionSet actions, ScorerParams& grads, std::span<const double> baselines) {
  return rl_objective(params, trace, features, actions, baselines, &grads);
}

double reinforce_loss(const ScorerParams& params, const DecisionTrace& trace, std::span<const Vector> features,
                      ActionSet actions, std::span<const double> baselines) {
  return rl_objective(params, trace, features, actions, baselines, nullptr);
}

// ---------------------------------------------------------------------------

void ScorerTrainOptions::validate() const {
  if (steps < 0 || batch_size <= 0) throw Error("scorer training: steps >= 0 and batch_size > 0 required");
  if (!(lr > 0.0) || !(tau0 > 0.0) || alpha_decay < 0.0 || !(tau_min > 0.0)) {
    throw Error("scorer training: invalid learning rate or temperature schedule");
  }
  if (!actions.allows(LayerState::kFull)) throw Error("scorer training: action set must include state 4");
  if (divergence_window <= 10 || !(divergence_factor > 1.0) || !(divergence_floor > 0.0)) {
    throw Error("scorer training: invalid divergence guard settings");
  }
}

TrainStepStats joint_train_step(ScorerParams& params, std::span<EpisodeEnv* const> batch, const RewardConfig& cfg,
                                const ScorerTrainOptions& options, double tau, Rng& rng, ToyModel* model,
                                const ScaleTable* scales, Adam* model_opt) {
  cfg.validate();
  if (batch.empty()) throw Error("joint_train_step: empty batch");
  const bool cotrain = options.mode == TrainMode::kCoTrain;
  if (cotrain && (model == nullptr || scales == nullptr || model_opt == nullptr)) {
    throw Error("joint_train_step: co-training needs the model, its scale table and an optimizer");
  }
  const auto n = batch.size();
  const RolloutPolicy policy{options.actions, options.source, false, tau};

  std::vector<Episode> episodes;
  episodes.reserve(n);
  std::vector<PathOutcome> outcomes;
  TrainStepStats stats;
  stats.tau = tau;
  double ce = 0.0, cost = 0.0, r_eff = 0.0;
  for (EpisodeEnv* env : batch) {
    Episode ep = rollout(params, *env, policy, &rng);
    PathOutcome full;
    if (!ep.outcome.classification) full = env->outcome(full_path(env->n_layers()));
    assign_rewards(ep.trace, episode_acc_reward(ep.outcome, env->sample().label, full, cfg), cfg);
    ce += ep.outcome.mean_nll();
    cost += cost_ratio(ep.trace.states);
    for (const auto& st : ep.trace.steps) r_eff += st.reward->r_eff;
    outcomes.push_back(ep.outcome);
    episodes.push_back(std::move(ep));
  }

  const std::size_t n_steps = episodes[0].trace.steps.size();
  std::vector<double> baselines;
  if (options.baseline) {
    baselines.assign(n_steps, 0.0);
    for (const auto& ep : episodes) {
      for (std::size_t i = 0; i < n_steps; ++i) baselines[i] += ep.trace.steps[i].reward->r;
    }
    for (double& b : baselines) b /= static_cast<double>(n);
  }

  ScorerParams grads = ScorerParams::zeros_like(params);
  double rl = 0.0;
  for (const auto& ep : episodes) {
    rl += reinforce_gradient(params, ep.trace, ep.features, options.actions, grads, baselines);
  }
  rl /= static_cast<double>(n);
  const double gscale = cfg.lambda / static_cast<double>(n);
  for_each_scorer_tensor(grads, grads, [&](std::vector<double>& g, std::vector<double>&) {
    for (double& v : g) v *= gscale;
  });
  const double norm = std::sqrt(scorer_sq_norm(grads));
  const double clip = options.clip_norm > 0.0 && norm > options.clip_norm ? options.clip_norm / norm : 1.0;
  for_each_scorer_tensor(params, grads, [&](std::vector<double>& w, const std::vector<double>& g) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= options.lr * clip * g[i];
  });

  if (cotrain) {
    ModelWeights mg = ModelWeights::zeros_like(model->weights());
    for (std::size_t e = 0; e < n; ++e) {
      ForwardTape tape;
      const Matrix logits = forward_taped(*model, batch[e]->sample().tokens, episodes[e].trace.states, *scales, tape);
      Matrix dlogits;
      sample_loss(logits, batch[e]->sample(), dlogits);
      for (double& v : dlogits.data()) v /= static_cast<double>(n);
      backward(*model, tape, dlogits, mg);
    }
    ModelWeights w = model->weights();
    model_opt->step(w, mg);
    model->set_weights(std::move(w));
  }

  stats.loss_ce = ce / static_cast<double>(n);
  stats.loss_rl = rl;
  stats.loss_all = stats.loss_ce + cfg.lambda * rl;
  stats.mean_cost_ratio = cost / static_cast<double>(n);
  stats.quality = aggregate_quality(outcomes);
  stats.mean_r_eff = r_eff / static_cast<double>(n);
  return stats;
}

DivergenceGuard::DivergenceGuard(int window, double factor, double floor)
    : window_(window), factor_(factor), floor_(floor) {}

void DivergenceGuard::observe(int step, double loss_all) {
  if (!std::isfinite(loss_all)) {
    throw DivergenceError("scorer training diverged: non-finite loss at step " + std::to_string(step));
  }
  history_.push_back(std::abs(loss_all));
  constexpr std::size_t kSpan = 10;
  const auto w = static_cast<std::size_t>(window_);
  if (history_.size() < w + kSpan) return;
  auto mean = [&](std::size_t end) {
    double s = 0.0;
    for (std::size_t i = end - kSpan; i < end; ++i) s += history_[i];
    return s / static_cast<double>(kSpan);
  };
  const double recent = mean(history_.size());
  const double past = mean(history_.size() - w);
  if (recent > factor_ * std::max(floor_, past)) {
    std::ostringstream msg;
    msg << "scorer training diverged at step " << step << ": mean |L_all| " << recent << " vs " << past << " "
        << window_ << " steps earlier";
    throw DivergenceError(msg.str());
  }
}

void write_train_log_header(std::ostream& os) { os << "step,loss_ce,loss_rl,mean_cost_ratio,accuracy,tau\n"; }

void write_train_log_row(std::ostream& os, const TrainStepStats& s) {
  os << s.step << ',' << s.loss_ce << ',' << s.loss_rl << ',' << s.mean_cost_ratio << ',' << s.quality << ','
     << s.tau << '\n';
}

ScorerTrainResult train_scorer(const ScorerParams& init, std::span<const std::unique_ptr<EpisodeEnv>> pool,
                               const RewardConfig& cfg, const ScorerTrainOptions& options, std::ostream* log) {
  options.validate();
  cfg.validate();
  if (options.mode != TrainMode::kFrozen) throw Error("train_scorer: use co_train for co-training");
  if (pool.empty()) throw Error("train_scorer: empty environment pool");
  ScorerTrainResult result{init, {}};
  Rng root(options.seed);
  Rng batch_rng = root.split(1);
  Rng policy_rng = root.split(2);
  DivergenceGuard guard(options.divergence_window, options.divergence_factor, options.divergence_floor);
  std::vector<EpisodeEnv*> batch(static_cast<std::size_t>(options.batch_size));
  if (log) write_train_log_header(*log);
  for (int t = 0; t < options.steps; ++t) {
    for (auto& e : batch) e = pool[batch_rng.index(pool.size())].get();
    const double tau = temperature(t, options.tau0, options.alpha_decay, options.tau_min);
    TrainStepStats s = joint_train_step(result.params, batch, cfg, options, tau, policy_rng);
    s.step = t;
    guard.observe(t, s.loss_all);
    if (log) write_train_log_row(*log, s);
    result.history.push_back(s);
  }
  return result;
}

ScorerTrainResult co_train(const ScorerParams& init, ToyModel& model, const ScaleTable& scales,
                           std::span<const Sample> pool, Readout readout, const RewardConfig& cfg,
                           const ScorerTrainOptions& options, std::ostream* log) {
  options.validate();
  cfg.validate();
  if (pool.empty()) throw Error("co_train: empty sample pool");
  ScorerTrainResult result{init, {}};
  Rng root(options.seed);
  Rng batch_rng = root.split(1);
  Rng policy_rng = root.split(2);
  DivergenceGuard guard(options.divergence_window, options.divergence_factor, options.divergence_floor);
  AdamOptions adam_opts;
  adam_opts.lr = options.model_lr;
  Adam adam(model.weights(), adam_opts);
  if (log) write_train_log_header(*log);
  for (int t = 0; t < options.steps; ++t) {
    std::vector<Sample> samples;
    for (int b = 0; b < options.batch_size; ++b) samples.push_back(pool[batch_rng.index(pool.size())]);
    const auto envs = live_envs(model, scales, samples, readout);
    std::vector<EpisodeEnv*> batch;
    for (const auto& e : envs) batch.push_back(e.get());
    const double tau = temperature(t, options.tau0, options.alpha_decay, options.tau_min);
    TrainStepStats s = joint_train_step(result.params, batch, cfg, options, tau, policy_rng, &model, &scales, &adam);
    s.step = t;
    guard.observe(t, s.loss_all);
    if (log) write_train_log_row(*log, s);
    result.history.push_back(s);
  }
  return result;
}

PolicyEvaluation evaluate_policy(const ScorerParams& params, std::span<const std::unique_ptr<EpisodeEnv>> envs,
                                 ActionSet actions, FeatureSource source) {
  if (envs.empty()) throw Error("evaluate_policy: no environments");
  PolicyEvaluation out;
  const RolloutPolicy policy{actions, source, true, 1.0};
  double cost = 0.0;
  for (const auto& env : envs) {
    Episode ep = rollout(params, *env, policy);
    cost += cost_ratio(ep.trace.states);
    out.paths.push_back(ep.trace.states);
    out.outcomes.push_back(ep.outcome);
  }
  out.mean_cost_ratio = cost / static_cast<double>(envs.size());
  out.quality = aggregate_quality(out.outcomes);
  return out;
}

}  // namespace dash
