// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training of the toy base model (the stand-in for a pre-trained LLM) and
// task-level evaluation helpers.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "dash/model.h"
#include "dash/tasks.h"

namespace dash {

class TrainingError : public Error {
 public:
  using Error::Error;
};

struct AdamOptions {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Global gradient-norm clip; <= 0 disables.
  double clip_norm = 1.0;
};

class Adam {
 public:
  Adam(const ModelWeights& like, AdamOptions options);
  /// w -= lr * adam(g). `g` may be rescaled by clipping.
  void step(ModelWeights& w, ModelWeights& g);
  int steps() const { return t_; }
  void set_lr(double lr) { options_.lr = lr; }

 private:
  AdamOptions options_;
  ModelWeights m_, v_;
  int t_ = 0;
};

/// Sum of squares over every tensor.
double squared_norm(const ModelWeights& w);

struct BaseTrainOptions {
  int max_steps = 6000;
  int batch_size = 32;
  AdamOptions adam{};
  int warmup_steps = 100;
  int eval_every = 100;
  /// Classification: stop early once validation accuracy reaches this.
  double stop_accuracy = 0.99;
};

struct BaseTrainReport {
  int steps = 0;
  double final_loss = 0.0;
  double val_accuracy = 0.0;    // classification tasks
  double val_perplexity = 0.0;  // language-model tasks
  std::vector<std::pair<int, double>> eval_history;
};

/// Deterministic given config.seed and the task data. Throws TrainingError
/// when a classification model misses task.spec.accuracy_floor after
/// max_steps, or when the loss becomes non-finite.
ToyModel train_base_model(const ModelConfig& config, const TaskData& task, const BaseTrainOptions& options,
                          BaseTrainReport* report = nullptr);

/// Fraction of samples whose last-position argmax equals the label.
double evaluate_accuracy(const ToyModel& model, std::span<const Sample> samples, std::span<const LayerState> path,
                         const ScaleTable& scales);

/// Corpus perplexity: exp(total NLL / total predicted tokens).
double evaluate_perplexity(const ToyModel& model, std::span<const Sample> samples,
                           std::span<const LayerState> path, const ScaleTable& scales);

/// Accuracy for classification tasks, negative perplexity otherwise.
double evaluate_quality(const ToyModel& model, std::span<const Sample> samples, std::span<const LayerState> path,
                        const ScaleTable& scales);

}  // namespace dash
