// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/rollout.h"

#include <algorithm>
#include <cmath>

namespace dash {

std::string to_string(Readout r) { return r == Readout::kLastToken ? "last_token" : "mean_pool"; }

Readout readout_from_string(const std::string& s) {
  if (s == "last_token" || s == "last") return Readout::kLastToken;
  if (s == "mean_pool" || s == "mean") return Readout::kMeanPool;
  throw Error("unknown readout '" + s + "'");
}

Vector readout(const Matrix& h, Readout r) {
  if (h.rows() == 0) throw Error("readout: empty hidden state");
  if (r == Readout::kMeanPool) return mean_rows(h);
  const auto row = h.row(h.rows() - 1);
  return Vector(row.begin(), row.end());
}

Vector approximate_next_hidden(std::span<const double> h, double scale) {
  if (!std::isfinite(scale) || scale <= 0.0) throw Error("approximate_next_hidden: scale must be finite and > 0");
  Vector out(h.begin(), h.end());
  for (double& v : out) v *= scale;
  return out;
}

// ---------------------------------------------------------------------------

double PathOutcome::perplexity() const { return std::exp(mean_nll()); }

PathOutcome score_logits(const Matrix& logits, const Sample& sample) {
  PathOutcome out;
  if (sample.is_classification()) {
    out.classification = true;
    out.predicted = predict_last(logits);
    out.correct = out.predicted == sample.label;
    const auto row = logits.row(logits.rows() - 1);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    out.nll_sum = -(row[static_cast<std::size_t>(sample.label)] - m - std::log(z));
    out.n_predicted = 1;
  } else {
    const auto [nll, n] = next_token_nll(logits, sample.tokens);
    out.nll_sum = nll;
    out.n_predicted = n;
  }
  return out;
}

namespace {

void check_full_path(std::span<const LayerState> path, int n_layers) {
  if (path.size() != static_cast<std::size_t>(n_layers) || !satisfies_boundary_rules(path)) {
    throw Error("episode path must have length L and run the first and last layer in state 4");
  }
}

void check_prefix(std::span<const LayerState> prefix, int n_layers) {
  if (prefix.empty() || prefix.size() > static_cast<std::size_t>(n_layers - 2) || prefix[0] != LayerState::kFull) {
    throw Error("decision prefix must hold layers 1..i with 1 <= i <= L - 2 and start with state 4");
  }
}

}  // namespace

LiveEnv::LiveEnv(const ToyModel& model, const ScaleTable& scales, Sample sample, Readout readout)
    : model_(model), scales_(scales), sample_(std::move(sample)), readout_(readout) {
  if (scales_.n_layers() != model_.n_layers()) throw Error("LiveEnv: scale table does not match the model");
}

const Matrix& LiveEnv::hidden(std::span<const LayerState> prefix) {
  const std::string key = path_string(prefix);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  Matrix h;
  if (prefix.empty()) {
    h = model_.embed(sample_.tokens);
  } else {
    const Matrix& prev = hidden(prefix.first(prefix.size() - 1));
    h = model_.layer_forward(prev, static_cast<int>(prefix.size()), prefix.back(), scales_);
  }
  return cache_.emplace(key, std::move(h)).first->second;
}

Vector LiveEnv::feature(std::span<const LayerState> prefix, FeatureSource source) {
  check_prefix(prefix, n_layers());
  if (source == FeatureSource::kTrue) return readout(hidden(prefix), readout_);
  const int i = static_cast<int>(prefix.size());
  return approximate_next_hidden(readout(hidden(prefix.first(prefix.size() - 1)), readout_), scales_.lookup(i));
}

PathOutcome LiveEnv::outcome(std::span<const LayerState> path) {
  check_full_path(path, n_layers());
  return score_logits(model_.head(hidden(path)), sample_);
}

// ---------------------------------------------------------------------------

std::size_t TabulatedEnv::prefix_code(std::span<const LayerState> states) {
  std::size_t c = 0, mul = 1;
  for (std::size_t j = 1; j < states.size(); ++j) {
    c += mul * static_cast<std::size_t>(slot(states[j]));
    mul *= 4;
  }
  return c;
}

TabulatedEnv::TabulatedEnv(const ToyModel& model, const ScaleTable& scales, Sample sample, Readout readout)
    : n_layers_(model.n_layers()), sample_(sample) {
  if (n_layers_ > 8) throw Error("TabulatedEnv: at most 8 layers (4^(L-2) paths per sample)");
  LiveEnv live(model, scales, std::move(sample), readout);
  const int L = n_layers_;
  true_features_.resize(static_cast<std::size_t>(L - 2));
  approx_features_.resize(static_cast<std::size_t>(L - 2));
  std::size_t width = 1;
  for (int depth = 1; depth <= L - 2; ++depth) {
    true_features_[static_cast<std::size_t>(depth - 1)].resize(width);
    approx_features_[static_cast<std::size_t>(depth - 1)].resize(width);
    width *= 4;
  }
  outcomes_.resize(width);

  Path prefix{LayerState::kFull};
  // Depth-first over states of layers 2..L-1.
  auto visit = [&](auto&& self) -> void {
    const auto depth = prefix.size();
    if (depth == static_cast<std::size_t>(L - 1)) {
      prefix.push_back(LayerState::kFull);
      outcomes_[prefix_code(std::span(prefix).first(prefix.size() - 1))] = live.outcome(prefix);
      prefix.pop_back();
      return;
    }
    const std::size_t c = prefix_code(prefix);
    true_features_[depth - 1][c] = live.feature(prefix, FeatureSource::kTrue);
    approx_features_[depth - 1][c] = live.feature(prefix, FeatureSource::kApprox);
    for (LayerState s : kAllStates) {
      prefix.push_back(s);
      self(self);
      prefix.pop_back();
    }
  };
  visit(visit);
}

Vector TabulatedEnv::feature(std::span<const LayerState> prefix, FeatureSource source) {
  check_prefix(prefix, n_layers_);
  const auto& table = source == FeatureSource::kTrue ? true_features_ : approx_features_;
  return table[prefix.size() - 1][prefix_code(prefix)];
}

PathOutcome TabulatedEnv::outcome(std::span<const LayerState> path) {
  check_full_path(path, n_layers_);
  return outcomes_[prefix_code(path.first(path.size() - 1))];
}

std::vector<std::unique_ptr<EpisodeEnv>> tabulate(const ToyModel& model, const ScaleTable& scales,
                                                  std::span<const Sample> samples, Readout readout) {
  std::vector<std::unique_ptr<EpisodeEnv>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(std::make_unique<TabulatedEnv>(model, scales, s, readout));
  return out;
}

std::vector<std::unique_ptr<EpisodeEnv>> live_envs(const ToyModel& model, const ScaleTable& scales,
                                                   std::span<const Sample> samples, Readout readout) {
  std::vector<std::unique_ptr<EpisodeEnv>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(std::make_unique<LiveEnv>(model, scales, s, readout));
  return out;
}

// ---------------------------------------------------------------------------

Episode rollout(const ScorerParams& params, EpisodeEnv& env, const RolloutPolicy& policy, Rng* rng) {
  if (!policy.greedy && rng == nullptr) throw Error("rollout: sampling requires an rng");
  const int L = env.n_layers();
  if (params.dims.n_layers != L) throw Error("rollout: scorer and model disagree on the number of layers");
  Episode ep;
  Path prefix{LayerState::kFull};
  for (int i = 1; i <= L - 2; ++i) {
    Vector h = env.feature(prefix, policy.source);
    DecisionStep step;
    step.layer = i + 1;
    step.prev = prefix.back();
    step.scores = score_candidates(params, h, i, step.prev);
    step.tau = policy.tau;
    step.probs = candidate_probabilities(step.scores, policy.tau, policy.actions);
    step.chosen = policy.greedy ? greedy_next_state(step.scores, policy.actions)
                                : sample_next_state(step.scores, policy.tau, *rng, policy.actions);
    prefix.push_back(step.chosen);
    ep.trace.steps.push_back(std::move(step));
    ep.features.push_back(std::move(h));
  }
  prefix.push_back(LayerState::kFull);
  ep.outcome = env.outcome(prefix);
  ep.trace.states = std::move(prefix);
  return ep;
}

double aggregate_quality(std::span<const PathOutcome> outcomes) {
  if (outcomes.empty()) throw Error("aggregate_quality: no outcomes");
  if (outcomes[0].classification) {
    double correct = 0.0;
    for (const auto& o : outcomes) correct += o.correct ? 1.0 : 0.0;
    return correct / static_cast<double>(outcomes.size());
  }
  CompensatedSum nll;
  long n = 0;
  for (const auto& o : outcomes) {
    nll.add(o.nll_sum);
    n += o.n_predicted;
  }
  return -std::exp(nll.value() / static_cast<double>(n));
}

}  // namespace dash
