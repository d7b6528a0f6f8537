// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic tasks standing in for real benchmarks:
//  - lookup: n content tokens followed by a query token naming a position;
//    the answer is the content token at that position (single-token
//    classification read off the last position).
//  - recall: n (key, value) pairs with distinct keys followed by a query
//    key; the answer is the value paired with it. Needs two attention hops.
//  - markov: next-token language modelling on text sampled from a sparse
//    random Markov chain (scored with perplexity).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dash {

struct Sample {
  std::vector<int> tokens;
  /// Class label for classification samples, -1 for language-model samples.
  int label = -1;

  bool is_classification() const { return label >= 0; }
  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class TaskKind { kLookup, kRecall, kMarkov };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

struct TaskSpec {
  TaskKind kind = TaskKind::kRecall;
  int vocab_size = 16;
  /// lookup: number of content positions. recall: number of pairs.
  /// markov: sequence length.
  int length = 6;
  /// recall: size of the key alphabet; values use the remaining tokens.
  int n_keys = 8;
  int n_train = 4096;
  int n_val = 512;
  std::uint64_t seed = 7;
  /// Full-path validation accuracy the base model must reach (lookup only).
  double accuracy_floor = 0.95;

  /// Sequence length fed to the model.
  int seq_len() const;
  /// Number of distinct answers for classification tasks.
  int n_classes() const;
  void validate() const;
};

struct TaskData {
  TaskSpec spec;
  std::vector<Sample> train;
  std::vector<Sample> val;

  bool is_classification() const { return spec.kind != TaskKind::kMarkov; }
  /// Accuracy of uniform guessing over the answer alphabet (classification)
  /// or 1/vocab (markov).
  double chance_level() const;
};

/// Deterministic given spec.seed.
TaskData make_task(const TaskSpec& spec);

/// Draws `count` fresh samples of the same distribution from an independent
/// stream (used for calibration sets).
std::vector<Sample> sample_task(const TaskSpec& spec, int count, std::uint64_t seed);

}  // namespace dash
