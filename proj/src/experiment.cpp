// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/experiment.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "dash/base_training.h"
#include "dash/calibration.h"

namespace dash {

ToyModel train_base(const RunConfig& cfg, BaseTrainReport* report) {
  return train_base_model(cfg.model, make_task(cfg.task), cfg.base_train, report);
}

std::vector<std::vector<int>> calibration_inputs(const RunConfig& cfg) {
  std::vector<std::vector<int>> out;
  for (Sample& s : sample_task(cfg.task, cfg.calibration.size, cfg.calibration.seed)) out.push_back(std::move(s.tokens));
  return out;
}

ScaleTable calibrate(const RunConfig& cfg, const ToyModel& model) {
  return compute_scale_table(model, calibration_inputs(cfg));
}

SampleSplit experiment_samples(const RunConfig& cfg) {
  const TaskData task = make_task(cfg.task);
  SampleSplit s;
  s.train.assign(task.train.begin(), task.train.begin() + cfg.eval.n_train);
  s.eval.assign(task.val.begin(), task.val.begin() + cfg.eval.n_eval);
  return s;
}

ScorerParams scorer_init(const RunConfig& cfg, int k) {
  return ScorerParams::init(cfg.scorer_dims(), cfg.scorer.alpha_penalty,
                            cfg.scorer.init_seed + 1000 * static_cast<std::uint64_t>(k));
}

ScorerTrainOptions scorer_options(const RunConfig& cfg, int k) {
  ScorerTrainOptions o = cfg.scorer_train;
  o.seed += 1000 * static_cast<std::uint64_t>(k);
  return o;
}

EnvSet make_envs(const ToyModel& model, const ScaleTable& scales, const SampleSplit& samples, Readout readout) {
  EnvSet e;
  if (model.n_layers() <= kMaxEnumerableLayers) {
    e.train = tabulate(model, scales, samples.train, readout);
    e.eval = tabulate(model, scales, samples.eval, readout);
  } else {
    e.train = live_envs(model, scales, samples.train, readout);
    e.eval = live_envs(model, scales, samples.eval, readout);
  }
  return e;
}

FittedPolicy fit_and_evaluate(const RunConfig& cfg, const EnvSet& envs, ActionSet actions, double target_speedup,
                              int k) {
  ScorerTrainOptions opts = scorer_options(cfg, k);
  opts.actions = actions;
  const ScorerParams init = scorer_init(cfg, k);
  FittedPolicy f;
  if (cfg.budget_enabled) {
    f.fit = fit_budget(init, envs.train, envs.train, cfg.reward, opts, target_speedup, cfg.budget);
  } else {
    ScorerTrainResult r = train_scorer(init, envs.train, cfg.reward, opts);
    f.fit.target_speedup = target_speedup;
    f.fit.beta = cfg.reward.beta;
    f.fit.params = std::move(r.params);
    f.fit.fit_ratio = evaluate_policy(f.fit.params, envs.train, actions, opts.source).mean_cost_ratio;
    f.fit.attained = std::abs(f.fit.fit_ratio - 1.0 / target_speedup) <= cfg.budget.tolerance;
    f.fit.trainings = 1;
    f.fit.seed = opts.seed;
  }
  f.eval = evaluate_policy(f.fit.params, envs.eval, actions, opts.source);
  return f;
}

int static_skips_for(double target_speedup, int n_layers) {
  const double budget = 1.0 / target_speedup;
  for (int k = 0; k <= n_layers - 2; ++k) {
    if (static_cast<double>(n_layers - k) / n_layers <= budget + 1e-12) return k;
  }
  return n_layers - 2;
}

namespace {

BenchRow learned_row(const char* name, double target, const FittedPolicy& f, std::uint64_t seed) {
  return BenchRow{name, target, f.eval.mean_cost_ratio, f.eval.quality, seed, f.fit.beta, f.fit.attained,
                  f.fit.fit_ratio};
}

bool same_target(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

BenchResult run_bench(const RunConfig& cfg, const ToyModel& model, const ScaleTable& scales,
                      const BenchOptions& options, std::ostream* log) {
  cfg.validate();
  const int L = model.n_layers();
  const Readout ro = cfg.scorer.readout;
  const SampleSplit samples = experiment_samples(cfg);
  const ScaleTable identity = ScaleTable::identity(L);
  const EnvSet envs = make_envs(model, scales, samples, ro);
  std::optional<EnvSet> identity_envs;
  if (options.ladder_target) identity_envs = make_envs(model, identity, samples, ro);
  if (log) *log << "environments ready\n";

  BenchResult out;
  std::vector<std::vector<int>> eval_inputs;
  for (const Sample& s : samples.eval) eval_inputs.push_back(s.tokens);
  out.skip_order = skip_order(io_similarity_profile(model, eval_inputs));

  const Path full = full_path(L);
  out.rows.push_back(BenchRow{method::kFull, 1.0, 1.0, evaluate_quality(model, samples.eval, full, scales),
                              cfg.eval.seed, 0.0, true, 1.0});
  auto static_row = [&](double target) {
    const Path p = static_skip_path(out.skip_order, static_skips_for(target, L), L);
    return BenchRow{method::kStatic, target, cost_ratio(p), evaluate_quality(model, samples.eval, p, identity),
                    cfg.eval.seed, 0.0, true, cost_ratio(p)};
  };
  for (double t : cfg.targets) out.rows.push_back(static_row(t));
  if (options.ladder_target &&
      std::none_of(cfg.targets.begin(), cfg.targets.end(), [&](double t) { return same_target(t, *options.ladder_target); })) {
    out.rows.push_back(static_row(*options.ladder_target));
  }

  std::map<Path, double> cache;
  const PathQualityFn quality = [&](const Path& p) {
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    std::vector<PathOutcome> o;
    for (const auto& e : envs.eval) o.push_back(e->outcome(p));
    return cache[p] = aggregate_quality(o);
  };

  for (int k = 0; k < cfg.eval.n_seeds; ++k) {
    const std::uint64_t seed = scorer_options(cfg, k).seed;
    std::optional<FittedPolicy> ladder_full;
    for (double t : cfg.targets) {
      FittedPolicy f = fit_and_evaluate(cfg, envs, cfg.scorer_train.actions, t, k);
      out.rows.push_back(learned_row(method::kDash, t, f, seed));
      Rng rng(cfg.eval.seed + static_cast<std::uint64_t>(k));
      const BaselineResult rb = random_skip_baseline(quality, L, f.eval.mean_cost_ratio * 4.0 * L,
                                                     cfg.eval.random_trials, rng);
      out.rows.push_back(BenchRow{method::kRandom, t, f.eval.mean_cost_ratio, rb.mean, seed, 0.0, true, 1.0});
      if (log) {
        *log << "seed " << seed << " target " << t << ": dash ratio " << f.eval.mean_cost_ratio << " quality "
             << f.eval.quality << (f.fit.attained ? "" : " (unattained)") << ", random " << rb.mean << "\n";
      }
      if (options.ladder_target && same_target(t, *options.ladder_target)) ladder_full = std::move(f);
    }
    if (!options.ladder_target) continue;
    const double lt = *options.ladder_target;
    const ActionSet skip_only = ActionSet::of({LayerState::kSkip, LayerState::kFull});
    const ActionSet with_int8 = ActionSet::of({LayerState::kSkip, LayerState::kInt8, LayerState::kFull});
    if (!ladder_full) ladder_full = fit_and_evaluate(cfg, envs, ActionSet::all(), lt, k);
    out.rows.push_back(learned_row(method::kNoComp, lt, fit_and_evaluate(cfg, *identity_envs, skip_only, lt, k), seed));
    out.rows.push_back(learned_row(method::kScale, lt, fit_and_evaluate(cfg, envs, skip_only, lt, k), seed));
    out.rows.push_back(learned_row(method::kScaleInt8, lt, fit_and_evaluate(cfg, envs, with_int8, lt, k), seed));
    out.rows.push_back(learned_row(method::kScaleInt8Int4, lt, *ladder_full, seed));
    if (log) {
      *log << "seed " << seed << " ladder:";
      for (std::size_t r = out.rows.size() - 4; r < out.rows.size(); ++r) {
        *log << ' ' << out.rows[r].method << '=' << out.rows[r].quality << '@' << out.rows[r].achieved_ratio;
      }
      *log << "\n";
    }
  }

  if (options.frontier && L <= kMaxEnumerableLayers) {
    std::vector<PathEvaluation> evals;
    for (const Path& p : enumerate_paths(L)) evals.push_back(evaluate_path(model, p, scales, samples.eval));
    out.frontier = pareto_frontier(evals);
  }
  return out;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "method,target_ratio,achieved_ratio,quality,seed\n";
  for (const BenchRow& r : rows) {
    os << r.method << ',' << r.target << ',' << r.achieved_ratio << ',' << r.quality << ',' << r.seed << '\n';
  }
}

}  // namespace dash
