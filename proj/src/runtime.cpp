// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/runtime.h"

#include <atomic>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace dash {

std::string to_string(PipelineMode m) { return m == PipelineMode::kSync ? "sync" : "async"; }

PipelineMode pipeline_mode_from_string(const std::string& s) {
  if (s == "sync") return PipelineMode::kSync;
  if (s == "async") return PipelineMode::kAsync;
  throw Error("unknown pipeline mode '" + s + "' (expected sync or async)");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#else
  std::this_thread::yield();
#endif
}

struct Decision {
  CandidateScores scores;
  LayerState chosen = LayerState::kFull;
  double seconds = 0.0;
};

Decision decide(const ScorerParams& scorer, std::span<const double> h, int layer, LayerState prev,
                ActionSet actions) {
  const auto t0 = Clock::now();
  Decision d;
  d.scores = score_candidates(scorer, h, layer, prev);
  d.chosen = greedy_next_state(d.scores, actions);
  d.seconds = seconds_since(t0);
  return d;
}

// Second lane of the asynchronous pipeline. Holds at most one job; the
// result is handed back through a single slot tagged with the job's
// sequence number, so a late result can never be read for a later job.
class DecisionLane {
 public:
  struct Job {
    Vector h;
    int layer = 0;
    LayerState prev = LayerState::kFull;
  };

  DecisionLane(const ScorerParams& scorer, ActionSet actions, LaneScheduling scheduling)
      : scorer_(scorer), actions_(actions), concurrent_(scheduling == LaneScheduling::kConcurrent) {
    if (concurrent_) worker_ = std::thread([this] { work(); });
  }

  ~DecisionLane() {
    if (!concurrent_) return;
    stop_.store(true, std::memory_order_release);
    submitted_.fetch_add(1, std::memory_order_release);
    submitted_.notify_one();
    worker_.join();
  }

  DecisionLane(const DecisionLane&) = delete;
  DecisionLane& operator=(const DecisionLane&) = delete;

  /// Returns the job's sequence number.
  std::uint64_t submit(Job job) {
    const std::uint64_t id = ++issued_;
    if (!concurrent_) {
      result_ = decide(scorer_, job.h, job.layer, job.prev, actions_);
      completed_.store(id, std::memory_order_relaxed);
      return id;
    }
    // An abandoned (timed-out) job may still be running; the slot frees up
    // once it finishes.
    wait_completed(id - 1, std::nullopt);
    job_ = std::move(job);
    submitted_.store(id, std::memory_order_release);
    submitted_.notify_one();
    return id;
  }

  /// The result of job `id`, or nullopt if it is not ready within `timeout`.
  std::optional<Decision> collect(std::uint64_t id, std::optional<std::chrono::nanoseconds> timeout) {
    if (!wait_completed(id, timeout)) return std::nullopt;
    return result_;
  }

 private:
  static constexpr int kSpin = 4000;

  bool wait_completed(std::uint64_t id, std::optional<std::chrono::nanoseconds> timeout) {
    if (completed_.load(std::memory_order_acquire) >= id) return true;
    if (timeout) {
      const auto deadline = Clock::now() + *timeout;
      while (completed_.load(std::memory_order_acquire) < id) {
        if (Clock::now() >= deadline) return false;
        cpu_relax();
      }
      return true;
    }
    for (int k = 0; k < kSpin; ++k) {
      if (completed_.load(std::memory_order_acquire) >= id) return true;
      cpu_relax();
    }
    for (std::uint64_t c = completed_.load(std::memory_order_acquire); c < id;
         c = completed_.load(std::memory_order_acquire)) {
      completed_.wait(c, std::memory_order_acquire);
    }
    return true;
  }

  void work() {
    std::uint64_t seen = 0;
    for (;;) {
      std::uint64_t s = submitted_.load(std::memory_order_acquire);
      for (int k = 0; s == seen && k < kSpin; ++k) {
        cpu_relax();
        s = submitted_.load(std::memory_order_acquire);
      }
      while (s == seen) {
        submitted_.wait(seen, std::memory_order_acquire);
        s = submitted_.load(std::memory_order_acquire);
      }
      if (stop_.load(std::memory_order_acquire)) return;
      seen = s;
      result_ = decide(scorer_, job_.h, job_.layer, job_.prev, actions_);
      completed_.store(s, std::memory_order_release);
      completed_.notify_one();
    }
  }

  const ScorerParams& scorer_;
  ActionSet actions_;
  bool concurrent_;
  std::uint64_t issued_ = 0;
  Job job_;
  Decision result_;
  std::atomic<std::uint64_t> submitted_{0};
  std::atomic<std::uint64_t> completed_{0};
  std::atomic<bool> stop_{false};
  std::thread worker_;
};

void check_inputs(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales) {
  const int L = model.n_layers();
  if (scorer.dims.n_layers != L) throw Error("runtime: scorer and model disagree on the number of layers");
  if (scorer.dims.d_h != model.config().d_model) throw Error("runtime: scorer input width != d_model");
  if (scales.n_layers() != L) throw Error("runtime: scale table and model disagree on the number of layers");
}

DecisionStep make_step(int layer, LayerState prev, const Decision& d) {
  DecisionStep step;
  step.layer = layer;
  step.prev = prev;
  step.chosen = d.chosen;
  step.scores = d.scores;
  step.score_seconds = d.seconds;
  return step;
}

DecisionStep fallback_step(int layer, LayerState prev) {
  DecisionStep step;
  step.layer = layer;
  step.prev = prev;
  step.chosen = LayerState::kFull;
  step.fallback = true;
  return step;
}

void finish(PipelineReport& r) {
  r.realized_cost_ratio = cost_ratio(r.trace.states);
  for (const auto& s : r.trace.steps) r.fallback_count += s.fallback ? 1 : 0;
}

}  // namespace

RunResult run_sync(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales,
                   std::span<const int> tokens, const RuntimeOptions& options) {
  check_inputs(model, scorer, scales);
  const int L = model.n_layers();
  RunResult out;
  PipelineReport& rep = out.report;
  rep.mode = PipelineMode::kSync;
  Path& states = rep.trace.states;
  states.push_back(LayerState::kFull);
  Matrix h = model.embed(tokens);
  for (int i = 1; i <= L; ++i) {
    const LayerState s = states.back();
    const auto t0 = Clock::now();
    h = model.layer_forward(h, i, s, scales);
    rep.trace.layer_seconds.push_back(seconds_since(t0));
    if (i <= L - 2) {
      const auto t1 = Clock::now();
      const Vector f = readout(h, options.readout);
      const Decision d = decide(scorer, f, i, s, options.actions);
      rep.decision_overhead_seconds.push_back(seconds_since(t1));
      rep.trace.steps.push_back(make_step(i + 1, s, d));
      states.push_back(d.chosen);
    } else if (i == L - 1) {
      states.push_back(LayerState::kFull);
    }
  }
  out.logits = model.head(h);
  finish(rep);
  return out;
}

RunResult run_async(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales,
                    std::span<const int> tokens, const RuntimeOptions& options) {
  check_inputs(model, scorer, scales);
  const int L = model.n_layers();
  RunResult out;
  PipelineReport& rep = out.report;
  rep.mode = PipelineMode::kAsync;
  Path& states = rep.trace.states;
  states.push_back(LayerState::kFull);
  DecisionLane lane(scorer, options.actions, options.scheduling);
  Matrix h = model.embed(tokens);
  for (int i = 1; i <= L; ++i) {
    const LayerState s = states.back();
    const bool decides = i <= L - 2;
    std::uint64_t job = 0;
    double overhead = 0.0;
    if (decides) {
      const auto t0 = Clock::now();
      job = lane.submit({approximate_next_hidden(readout(h, options.readout), scales.lookup(i)), i, s});
      overhead = seconds_since(t0);
    }
    const auto t1 = Clock::now();
    h = model.layer_forward(h, i, s, scales);
    rep.trace.layer_seconds.push_back(seconds_since(t1));
    if (decides) {
      const auto t2 = Clock::now();
      const bool injected = options.inject_timeout && options.inject_timeout(i + 1);
      std::optional<Decision> d;
      if (!injected) d = lane.collect(job, options.scheduling == LaneScheduling::kSerial ? std::nullopt : options.timeout);
      DecisionStep step = d ? make_step(i + 1, s, *d) : fallback_step(i + 1, s);
      rep.decision_overhead_seconds.push_back(overhead + seconds_since(t2));
      states.push_back(step.chosen);
      rep.trace.steps.push_back(std::move(step));
    } else if (i == L - 1) {
      states.push_back(LayerState::kFull);
    }
  }
  out.logits = model.head(h);
  finish(rep);
  return out;
}

DecisionTrace async_reference_trace(const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales,
                                    std::span<const int> tokens, const RuntimeOptions& options) {
  check_inputs(model, scorer, scales);
  const int L = model.n_layers();
  DecisionTrace t;
  t.states.push_back(LayerState::kFull);
  Matrix h = model.embed(tokens);
  for (int i = 1; i <= L - 2; ++i) {
    const LayerState s = t.states.back();
    const Vector approx = approximate_next_hidden(readout(h, options.readout), scales.lookup(i));
    if (options.inject_timeout && options.inject_timeout(i + 1)) {
      t.steps.push_back(fallback_step(i + 1, s));
    } else {
      t.steps.push_back(make_step(i + 1, s, decide(scorer, approx, i, s, options.actions)));
    }
    t.states.push_back(t.steps.back().chosen);
    h = model.layer_forward(h, i, s, scales);
  }
  t.states.push_back(LayerState::kFull);
  return t;
}

bool same_decisions(const DecisionTrace& a, const DecisionTrace& b) {
  if (a.states != b.states || a.steps.size() != b.steps.size()) return false;
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    const DecisionStep& x = a.steps[k];
    const DecisionStep& y = b.steps[k];
    if (x.layer != y.layer || x.prev != y.prev || x.chosen != y.chosen || x.fallback != y.fallback ||
        !(x.scores == y.scores)) {
      return false;
    }
  }
  return true;
}

OverheadBenchmark benchmark_decision_overhead(const ToyModel& model, const ScorerParams& scorer,
                                              const ScaleTable& scales, std::span<const std::vector<int>> inputs,
                                              int runs, const RuntimeOptions& options) {
  if (inputs.empty() || runs <= 0) throw Error("benchmark_decision_overhead: need inputs and runs > 0");
  RuntimeOptions async_opts = options;
  async_opts.scheduling = LaneScheduling::kConcurrent;
  CompensatedSum sync_total, async_total;
  long decisions = 0;
  for (int r = 0; r < runs; ++r) {
    const auto& tokens = inputs[static_cast<std::size_t>(r) % inputs.size()];
    const RunResult s = run_sync(model, scorer, scales, tokens, options);
    const RunResult a = run_async(model, scorer, scales, tokens, async_opts);
    for (double v : s.report.decision_overhead_seconds) sync_total.add(v);
    for (double v : a.report.decision_overhead_seconds) async_total.add(v);
    decisions += static_cast<long>(s.report.decision_overhead_seconds.size());
  }
  OverheadBenchmark b;
  b.runs = runs;
  b.sync_mean_seconds = sync_total.value() / static_cast<double>(decisions);
  b.async_mean_seconds = async_total.value() / static_cast<double>(decisions);
  b.ratio = b.async_mean_seconds / b.sync_mean_seconds;
  return b;
}

}  // namespace dash
