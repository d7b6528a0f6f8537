// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/config.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dash {

using nlohmann::json;

namespace {

json to_json(const RunConfig& c) {
  const ModelConfig& m = c.model;
  const TaskSpec& t = c.task;
  const BaseTrainOptions& b = c.base_train;
  const ScorerTrainOptions& st = c.scorer_train;
  json j;
  j["model"] = {{"n_layers", m.n_layers}, {"d_model", m.d_model},       {"n_heads", m.n_heads},
                {"d_ff", m.d_ff},         {"vocab_size", m.vocab_size}, {"max_seq_len", m.max_seq_len},
                {"seed", m.seed}};
  j["task"] = {{"kind", to_string(t.kind)}, {"vocab_size", t.vocab_size}, {"length", t.length},
               {"n_keys", t.n_keys},        {"n_train", t.n_train},       {"n_val", t.n_val},
               {"seed", t.seed},            {"accuracy_floor", t.accuracy_floor}};
  j["base_train"] = {{"max_steps", b.max_steps},       {"batch_size", b.batch_size},
                     {"lr", b.adam.lr},                {"clip_norm", b.adam.clip_norm},
                     {"warmup_steps", b.warmup_steps}, {"eval_every", b.eval_every},
                     {"stop_accuracy", b.stop_accuracy}};
  j["calibration"] = {{"size", c.calibration.size}, {"seed", c.calibration.seed}};
  j["scorer"] = {{"d_l", c.scorer.d_l},
                 {"d1", c.scorer.d1},
                 {"d2", c.scorer.d2},
                 {"head", to_string(c.scorer.head)},
                 {"alpha_penalty", c.scorer.alpha_penalty},
                 {"readout", to_string(c.scorer.readout)},
                 {"init_seed", c.scorer.init_seed}};
  j["reward"] = {{"beta", c.reward.beta},
                 {"lambda", c.reward.lambda},
                 {"epsilon", c.reward.epsilon},
                 {"ppl_sign_mode", to_string(c.reward.ppl_mode)}};
  j["scorer_train"] = {{"steps", st.steps},
                       {"batch_size", st.batch_size},
                       {"lr", st.lr},
                       {"clip_norm", st.clip_norm},
                       {"tau0", st.tau0},
                       {"alpha_decay", st.alpha_decay},
                       {"tau_min", st.tau_min},
                       {"actions", st.actions.to_string()},
                       {"feature_source", st.source == FeatureSource::kTrue ? "true" : "approx"},
                       {"baseline", st.baseline},
                       {"mode", st.mode == TrainMode::kFrozen ? "frozen" : "cotrain"},
                       {"model_lr", st.model_lr},
                       {"seed", st.seed},
                       {"divergence_window", st.divergence_window},
                       {"divergence_factor", st.divergence_factor},
                       {"divergence_floor", st.divergence_floor}};
  j["budget"] = {{"enabled", c.budget_enabled},       {"tolerance", c.budget.tolerance},
                 {"beta_hi", c.budget.beta_hi},       {"beta_max", c.budget.beta_max},
                 {"max_iters", c.budget.max_iters},   {"grid_points", c.budget.grid_points},
                 {"seed_retries", c.budget.seed_retries}};
  j["eval"] = {{"n_train", c.eval.n_train},
               {"n_eval", c.eval.n_eval},
               {"n_seeds", c.eval.n_seeds},
               {"random_trials", c.eval.random_trials},
               {"seed", c.eval.seed}};
  j["targets"] = c.targets;
  j["target"] = c.target;
  j["paths"] = {{"checkpoint", c.checkpoint}, {"out_dir", c.out_dir}};
  return j;
}

void check_keys(const json& user, const json& reference, const std::string& where) {
  if (!user.is_object()) throw Error("config: '" + where + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!reference.contains(key)) throw Error("config: unknown key '" + path + "'");
    if (reference[key].is_object()) check_keys(value, reference[key], path);
  }
}

template <typename T>
void read(const json& j, const char* section, const char* key, T& out) {
  try {
    out = j.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(std::string("config: bad value for '") + section + "." + key + "': " + e.what());
  }
}

RunConfig from_json(const json& j) {
  RunConfig c;
  ModelConfig& m = c.model;
  read(j, "model", "n_layers", m.n_layers);
  read(j, "model", "d_model", m.d_model);
  read(j, "model", "n_heads", m.n_heads);
  read(j, "model", "d_ff", m.d_ff);
  read(j, "model", "vocab_size", m.vocab_size);
  read(j, "model", "max_seq_len", m.max_seq_len);
  read(j, "model", "seed", m.seed);

  TaskSpec& t = c.task;
  std::string s;
  read(j, "task", "kind", s);
  t.kind = task_kind_from_string(s);
  read(j, "task", "vocab_size", t.vocab_size);
  read(j, "task", "length", t.length);
  read(j, "task", "n_keys", t.n_keys);
  read(j, "task", "n_train", t.n_train);
  read(j, "task", "n_val", t.n_val);
  read(j, "task", "seed", t.seed);
  read(j, "task", "accuracy_floor", t.accuracy_floor);

  BaseTrainOptions& b = c.base_train;
  read(j, "base_train", "max_steps", b.max_steps);
  read(j, "base_train", "batch_size", b.batch_size);
  read(j, "base_train", "lr", b.adam.lr);
  read(j, "base_train", "clip_norm", b.adam.clip_norm);
  read(j, "base_train", "warmup_steps", b.warmup_steps);
  read(j, "base_train", "eval_every", b.eval_every);
  read(j, "base_train", "stop_accuracy", b.stop_accuracy);

  read(j, "calibration", "size", c.calibration.size);
  read(j, "calibration", "seed", c.calibration.seed);

  read(j, "scorer", "d_l", c.scorer.d_l);
  read(j, "scorer", "d1", c.scorer.d1);
  read(j, "scorer", "d2", c.scorer.d2);
  read(j, "scorer", "head", s);
  c.scorer.head = scorer_head_from_string(s);
  read(j, "scorer", "alpha_penalty", c.scorer.alpha_penalty);
  read(j, "scorer", "readout", s);
  c.scorer.readout = readout_from_string(s);
  read(j, "scorer", "init_seed", c.scorer.init_seed);

  read(j, "reward", "beta", c.reward.beta);
  read(j, "reward", "lambda", c.reward.lambda);
  read(j, "reward", "epsilon", c.reward.epsilon);
  read(j, "reward", "ppl_sign_mode", s);
  c.reward.ppl_mode = ppl_reward_mode_from_string(s);

  ScorerTrainOptions& st = c.scorer_train;
  read(j, "scorer_train", "steps", st.steps);
  read(j, "scorer_train", "batch_size", st.batch_size);
  read(j, "scorer_train", "lr", st.lr);
  read(j, "scorer_train", "clip_norm", st.clip_norm);
  read(j, "scorer_train", "tau0", st.tau0);
  read(j, "scorer_train", "alpha_decay", st.alpha_decay);
  read(j, "scorer_train", "tau_min", st.tau_min);
  read(j, "scorer_train", "actions", s);
  st.actions = action_set_from_string(s);
  read(j, "scorer_train", "feature_source", s);
  if (s != "true" && s != "approx") throw Error("config: scorer_train.feature_source must be true or approx");
  st.source = s == "true" ? FeatureSource::kTrue : FeatureSource::kApprox;
  read(j, "scorer_train", "baseline", st.baseline);
  read(j, "scorer_train", "mode", s);
  if (s != "frozen" && s != "cotrain") throw Error("config: scorer_train.mode must be frozen or cotrain");
  st.mode = s == "frozen" ? TrainMode::kFrozen : TrainMode::kCoTrain;
  read(j, "scorer_train", "model_lr", st.model_lr);
  read(j, "scorer_train", "seed", st.seed);
  read(j, "scorer_train", "divergence_window", st.divergence_window);
  read(j, "scorer_train", "divergence_factor", st.divergence_factor);
  read(j, "scorer_train", "divergence_floor", st.divergence_floor);

  read(j, "budget", "enabled", c.budget_enabled);
  read(j, "budget", "tolerance", c.budget.tolerance);
  read(j, "budget", "beta_hi", c.budget.beta_hi);
  read(j, "budget", "beta_max", c.budget.beta_max);
  read(j, "budget", "max_iters", c.budget.max_iters);
  read(j, "budget", "grid_points", c.budget.grid_points);
  read(j, "budget", "seed_retries", c.budget.seed_retries);

  read(j, "eval", "n_train", c.eval.n_train);
  read(j, "eval", "n_eval", c.eval.n_eval);
  read(j, "eval", "n_seeds", c.eval.n_seeds);
  read(j, "eval", "random_trials", c.eval.random_trials);
  read(j, "eval", "seed", c.eval.seed);

  try {
    c.targets = j.at("targets").get<std::vector<double>>();
    c.target = j.at("target").get<double>();
  } catch (const json::exception& e) {
    throw Error(std::string("config: bad targets: ") + e.what());
  }
  read(j, "paths", "checkpoint", c.checkpoint);
  read(j, "paths", "out_dir", c.out_dir);
  return c;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.scorer_train.lr = 0.05;
  c.scorer_train.alpha_decay = 3.0 / c.scorer_train.steps;
  return c;
}

ScorerDims RunConfig::scorer_dims() const {
  ScorerDims d;
  d.d_h = model.d_model;
  d.d_l = scorer.d_l;
  d.d1 = scorer.d1;
  d.d2 = scorer.d2;
  d.n_layers = model.n_layers;
  d.head = scorer.head;
  return d;
}

void RunConfig::validate() const {
  model.validate();
  task.validate();
  if (task.vocab_size != model.vocab_size) throw Error("config: task.vocab_size must equal model.vocab_size");
  if (task.seq_len() > model.max_seq_len) throw Error("config: task sequences exceed model.max_seq_len");
  if (calibration.size <= 0) throw Error("config: calibration.size must be positive");
  if (scorer.d_l <= 0 || scorer.d1 <= 0 || scorer.d2 <= 0) throw Error("config: scorer widths must be positive");
  if (!(scorer.alpha_penalty >= 0.0)) throw Error("config: scorer.alpha_penalty must be >= 0");
  reward.validate();
  scorer_train.validate();
  if (eval.n_train <= 0 || eval.n_train > task.n_train) throw Error("config: eval.n_train must be in [1, task.n_train]");
  if (eval.n_eval <= 0 || eval.n_eval > task.n_val) throw Error("config: eval.n_eval must be in [1, task.n_val]");
  if (eval.n_seeds <= 0 || eval.random_trials <= 0) throw Error("config: eval.n_seeds and random_trials must be > 0");
  if (targets.empty()) throw Error("config: targets must not be empty");
  for (double t : targets) {
    if (!(t > 1.0 && t <= 4.0)) throw Error("config: targets must lie in (1, 4]");
  }
  if (!(target >= 1.0 && target <= 4.0)) throw Error("config: target must lie in [1, 4]");
}

RunConfig config_from_json_text(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  json merged = to_json(RunConfig::defaults());
  check_keys(user, merged, "");
  merged.merge_patch(user);
  RunConfig c = from_json(merged);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  return hex64(fnv1a({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
}

}  // namespace dash
