// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/base_training.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dash/model_grad.h"

namespace dash {

double squared_norm(const ModelWeights& w) {
  double total = 0.0;
  for_each_tensor(w, [&](const std::vector<double>& t) {
    for (double v : t) total += v * v;
  });
  return total;
}

Adam::Adam(const ModelWeights& like, AdamOptions options)
    : options_(options), m_(ModelWeights::zeros_like(like)), v_(ModelWeights::zeros_like(like)) {}

void Adam::step(ModelWeights& w, ModelWeights& g) {
  if (options_.clip_norm > 0.0) {
    const double norm = std::sqrt(squared_norm(g));
    if (norm > options_.clip_norm) {
      const double s = options_.clip_norm / norm;
      for_each_tensor(g, [&](std::vector<double>& t) {
        for (double& v : t) v *= s;
      });
    }
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, t_);
  const double c2 = 1.0 - std::pow(b2, t_);
  // Walk the four structures in lock-step through a flat view.
  std::vector<std::vector<double>*> wt, gt, mt, vt;
  for_each_tensor(w, [&](std::vector<double>& t) { wt.push_back(&t); });
  for_each_tensor(g, [&](std::vector<double>& t) { gt.push_back(&t); });
  for_each_tensor(m_, [&](std::vector<double>& t) { mt.push_back(&t); });
  for_each_tensor(v_, [&](std::vector<double>& t) { vt.push_back(&t); });
  for (std::size_t k = 0; k < wt.size(); ++k) {
    auto& wv = *wt[k];
    const auto& gv = *gt[k];
    auto& mv = *mt[k];
    auto& vv = *vt[k];
    for (std::size_t i = 0; i < wv.size(); ++i) {
      mv[i] = b1 * mv[i] + (1.0 - b1) * gv[i];
      vv[i] = b2 * vv[i] + (1.0 - b2) * gv[i] * gv[i];
      wv[i] -= options_.lr * (mv[i] / c1) / (std::sqrt(vv[i] / c2) + options_.eps);
    }
  }
}

double evaluate_accuracy(const ToyModel& model, std::span<const Sample> samples, std::span<const LayerState> path,
                         const ScaleTable& scales) {
  if (samples.empty()) throw Error("evaluate_accuracy: empty sample set");
  int correct = 0;
  for (const Sample& s : samples) {
    if (!s.is_classification()) throw Error("evaluate_accuracy: sample has no label");
    if (predict_last(model.forward_with_path(s.tokens, path, scales)) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double evaluate_perplexity(const ToyModel& model, std::span<const Sample> samples,
                           std::span<const LayerState> path, const ScaleTable& scales) {
  if (samples.empty()) throw Error("evaluate_perplexity: empty sample set");
  CompensatedSum nll;
  long count = 0;
  for (const Sample& s : samples) {
    const auto [total, n] = next_token_nll(model.forward_with_path(s.tokens, path, scales), s.tokens);
    nll.add(total);
    count += n;
  }
  return std::exp(nll.value() / static_cast<double>(count));
}

double evaluate_quality(const ToyModel& model, std::span<const Sample> samples, std::span<const LayerState> path,
                        const ScaleTable& scales) {
  if (samples.empty()) throw Error("evaluate_quality: empty sample set");
  if (samples.front().is_classification()) return evaluate_accuracy(model, samples, path, scales);
  return -evaluate_perplexity(model, samples, path, scales);
}

ToyModel train_base_model(const ModelConfig& config, const TaskData& task, const BaseTrainOptions& options,
                          BaseTrainReport* report) {
  config.validate();
  if (task.train.empty() || task.val.empty()) throw Error("train_base_model: task needs train and validation splits");
  if (task.spec.vocab_size > config.vocab_size) throw Error("train_base_model: task vocabulary exceeds model vocabulary");
  if (task.spec.seq_len() > config.max_seq_len) throw Error("train_base_model: task sequences exceed max_seq_len");

  ToyModel model = ToyModel::init(config);
  ModelWeights weights = model.weights();
  Adam adam(weights, options.adam);
  Rng rng = Rng(config.seed).split(0x7472);
  const ScaleTable identity = ScaleTable::identity(config.n_layers);
  const Path full = full_path(config.n_layers);
  const bool classification = task.is_classification();

  BaseTrainReport local;
  double loss_ema = 0.0;
  int step = 0;
  for (step = 1; step <= options.max_steps; ++step) {
    ModelWeights grads = ModelWeights::zeros_like(weights);
    double batch_loss = 0.0;
    ForwardTape tape;
    Matrix dlogits;
    for (int b = 0; b < options.batch_size; ++b) {
      const Sample& s = task.train[rng.index(task.train.size())];
      const Matrix logits = forward_taped(model, s.tokens, full, identity, tape);
      batch_loss += sample_loss(logits, s, dlogits);
      for (double& v : dlogits.data()) v /= options.batch_size;
      backward(model, tape, dlogits, grads);
    }
    batch_loss /= options.batch_size;
    if (!std::isfinite(batch_loss)) {
      throw TrainingError("train_base_model: loss became non-finite at step " + std::to_string(step));
    }
    loss_ema = step == 1 ? batch_loss : 0.95 * loss_ema + 0.05 * batch_loss;

    double lr = options.adam.lr;
    if (options.warmup_steps > 0 && step <= options.warmup_steps) {
      lr *= static_cast<double>(step) / options.warmup_steps;
    }
    adam.set_lr(lr);
    adam.step(weights, grads);
    model.set_weights(weights);

    if (classification && options.eval_every > 0 && step % options.eval_every == 0) {
      const double acc = evaluate_accuracy(model, task.val, full, identity);
      local.eval_history.emplace_back(step, acc);
      if (acc >= options.stop_accuracy) break;
    }
  }
  local.steps = std::min(step, options.max_steps);
  local.final_loss = loss_ema;
  if (classification) {
    local.val_accuracy = evaluate_accuracy(model, task.val, full, identity);
    if (local.val_accuracy < task.spec.accuracy_floor) {
      std::ostringstream msg;
      msg << "train_base_model: validation accuracy " << local.val_accuracy << " below floor "
          << task.spec.accuracy_floor << " after " << local.steps << " steps (loss " << loss_ema << ")";
      throw TrainingError(msg.str());
    }
  } else {
    local.val_perplexity = evaluate_perplexity(model, task.val, full, identity);
  }
  if (report) *report = std::move(local);
  return model;
}

}  // namespace dash
