// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/tasks.h"

#include <algorithm>
#include <cmath>

#include "dash/numerics.h"

namespace dash {

namespace {

Sample lookup_sample(const TaskSpec& spec, Rng& rng) {
  const int alphabet = spec.n_classes();
  Sample s;
  s.tokens.reserve(static_cast<std::size_t>(spec.length) + 1);
  for (int i = 0; i < spec.length; ++i) s.tokens.push_back(static_cast<int>(rng.index(alphabet)));
  const int pos = static_cast<int>(rng.index(spec.length));
  s.tokens.push_back(alphabet + pos);
  s.label = s.tokens[static_cast<std::size_t>(pos)];
  return s;
}

Sample recall_sample(const TaskSpec& spec, Rng& rng) {
  std::vector<int> keys(static_cast<std::size_t>(spec.n_keys));
  for (int k = 0; k < spec.n_keys; ++k) keys[static_cast<std::size_t>(k)] = k;
  // Partial Fisher-Yates: the first `length` keys are distinct.
  for (int i = 0; i < spec.length; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.index(static_cast<std::size_t>(spec.n_keys - i));
    std::swap(keys[static_cast<std::size_t>(i)], keys[j]);
  }
  Sample s;
  std::vector<int> values;
  for (int i = 0; i < spec.length; ++i) {
    const int value = spec.n_keys + static_cast<int>(rng.index(spec.n_classes()));
    s.tokens.push_back(keys[static_cast<std::size_t>(i)]);
    s.tokens.push_back(value);
    values.push_back(value);
  }
  const auto q = rng.index(static_cast<std::size_t>(spec.length));
  s.tokens.push_back(keys[q]);
  s.label = values[q];
  return s;
}

// Each state has a handful of likely successors so that the chain has low
// but nonzero entropy.
std::vector<Vector> markov_transitions(const TaskSpec& spec) {
  Rng rng(spec.seed ^ 0x6d61726b6f76ULL);
  const int v = spec.vocab_size;
  std::vector<Vector> rows(static_cast<std::size_t>(v), Vector(static_cast<std::size_t>(v)));
  for (auto& row : rows) {
    double total = 0.0;
    for (auto& p : row) {
      const double u = rng.uniform();
      p = std::pow(u, 6.0) + 1e-3;
      total += p;
    }
    for (auto& p : row) p /= total;
  }
  return rows;
}

Sample markov_sample(const TaskSpec& spec, const std::vector<Vector>& rows, Rng& rng) {
  Sample s;
  int cur = static_cast<int>(rng.index(spec.vocab_size));
  s.tokens.push_back(cur);
  for (int i = 1; i < spec.length; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    int next = spec.vocab_size - 1;
    for (int k = 0; k < spec.vocab_size; ++k) {
      acc += rows[static_cast<std::size_t>(cur)][static_cast<std::size_t>(k)];
      if (u < acc) {
        next = k;
        break;
      }
    }
    s.tokens.push_back(next);
    cur = next;
  }
  return s;
}

std::vector<Sample> draw(const TaskSpec& spec, int count, Rng rng) {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  if (spec.kind == TaskKind::kLookup) {
    for (int i = 0; i < count; ++i) out.push_back(lookup_sample(spec, rng));
  } else if (spec.kind == TaskKind::kRecall) {
    for (int i = 0; i < count; ++i) out.push_back(recall_sample(spec, rng));
  } else {
    const auto rows = markov_transitions(spec);
    for (int i = 0; i < count; ++i) out.push_back(markov_sample(spec, rows, rng));
  }
  return out;
}

}  // namespace

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kLookup: return "lookup";
    case TaskKind::kRecall: return "recall";
    case TaskKind::kMarkov: return "markov";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "lookup") return TaskKind::kLookup;
  if (s == "recall" || s == "copy") return TaskKind::kRecall;
  if (s == "markov" || s == "lm") return TaskKind::kMarkov;
  throw Error("unknown task kind '" + s + "'");
}

void TaskSpec::validate() const {
  if (vocab_size < 2) throw Error("task: vocab_size must be >= 2");
  if (length < 2) throw Error("task: length must be >= 2");
  if (kind == TaskKind::kLookup && vocab_size - length < 2) {
    throw Error("lookup task: vocab_size must exceed length by at least 2");
  }
  if (kind == TaskKind::kRecall && (n_keys < length || vocab_size - n_keys < 2)) {
    throw Error("recall task: need n_keys >= length and at least two value tokens");
  }
  if (n_train <= 0 || n_val <= 0) throw Error("task: train/validation splits must be non-empty");
}

int TaskSpec::seq_len() const {
  switch (kind) {
    case TaskKind::kLookup: return length + 1;
    case TaskKind::kRecall: return 2 * length + 1;
    case TaskKind::kMarkov: return length;
  }
  return length;
}

int TaskSpec::n_classes() const {
  switch (kind) {
    case TaskKind::kLookup: return vocab_size - length;
    case TaskKind::kRecall: return vocab_size - n_keys;
    case TaskKind::kMarkov: return vocab_size;
  }
  return vocab_size;
}

double TaskData::chance_level() const {
  if (is_classification()) return 1.0 / spec.n_classes();
  return 1.0 / spec.vocab_size;
}

TaskData make_task(const TaskSpec& spec) {
  spec.validate();
  TaskData data;
  data.spec = spec;
  Rng root(spec.seed);
  data.train = draw(spec, spec.n_train, root.split(1));
  data.val = draw(spec, spec.n_val, root.split(2));
  return data;
}

std::vector<Sample> sample_task(const TaskSpec& spec, int count, std::uint64_t seed) {
  spec.validate();
  return draw(spec, count, Rng(seed).split(3));
}

}  // namespace dash
