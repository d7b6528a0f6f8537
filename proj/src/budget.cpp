// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/budget.h"

#include <cmath>
#include <limits>

namespace dash {

BudgetPoint fit_budget(const ScorerParams& init, std::span<const std::unique_ptr<EpisodeEnv>> train_pool,
                       std::span<const std::unique_ptr<EpisodeEnv>> fit_envs, const RewardConfig& reward,
                       const ScorerTrainOptions& options, double target_speedup, const BudgetOptions& budget) {
  if (!(target_speedup >= 1.0) || target_speedup > 4.0) throw Error("fit_budget: target speedup must be in [1, 4]");
  if (budget.grid_points < 0 || budget.seed_retries < 0) throw Error("fit_budget: negative search counts");
  const double target = 1.0 / target_speedup;

  BudgetPoint best;
  best.target_speedup = target_speedup;
  best.seed = options.seed;
  double best_gap = std::numeric_limits<double>::infinity();
  int trainings = 0;
  auto hit = [&] { return best_gap <= budget.tolerance; };

  auto probe = [&](double beta, std::uint64_t seed) {
    RewardConfig cfg = reward;
    cfg.beta = beta;
    ScorerTrainOptions opts = options;
    opts.seed = seed;
    ScorerTrainResult r = train_scorer(init, train_pool, cfg, opts);
    ++trainings;
    const double ratio = evaluate_policy(r.params, fit_envs, options.actions, options.source).mean_cost_ratio;
    const double gap = std::abs(ratio - target);
    if (gap < best_gap) {
      best_gap = gap;
      best.beta = beta;
      best.fit_ratio = ratio;
      best.seed = seed;
      best.params = std::move(r.params);
    }
    return ratio;
  };

  auto search = [&](std::uint64_t seed) {
    double lo = 0.0;
    if (probe(lo, seed) <= target + budget.tolerance) return;
    double hi = budget.beta_hi;
    double r_hi = probe(hi, seed);
    while (r_hi > target + budget.tolerance && hi < budget.beta_max) {
      lo = hi;
      hi *= 2.0;
      r_hi = probe(hi, seed);
    }
    if (hit() || r_hi > target + budget.tolerance) return;
    for (int it = 0; it < budget.max_iters && !hit(); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double r = probe(mid, seed);
      if (hit()) return;
      if (r > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    for (int g = 1; g <= budget.grid_points && !hit(); ++g) {
      probe(lo + (hi - lo) * g / (budget.grid_points + 1), seed);
    }
  };

  for (int k = 0; k <= budget.seed_retries && !hit(); ++k) search(options.seed + static_cast<std::uint64_t>(k));
  best.trainings = trainings;
  best.attained = hit();
  return best;
}

std::vector<BudgetRow> budget_sweep(const ScorerParams& init, std::span<const std::unique_ptr<EpisodeEnv>> train_pool,
                                    std::span<const std::unique_ptr<EpisodeEnv>> eval_envs, const RewardConfig& reward,
                                    const ScorerTrainOptions& options, std::span<const double> targets,
                                    const BudgetOptions& budget) {
  std::vector<BudgetRow> rows;
  for (double target : targets) {
    BudgetPoint p = fit_budget(init, train_pool, train_pool, reward, options, target, budget);
    const PolicyEvaluation e = evaluate_policy(p.params, eval_envs, options.actions, options.source);
    rows.push_back(BudgetRow{target, p.beta, e.mean_cost_ratio, e.quality, p.attained, std::move(p.params)});
  }
  return rows;
}

}  // namespace dash
