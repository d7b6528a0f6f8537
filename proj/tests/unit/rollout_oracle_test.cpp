// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>

#include "dash/base_training.h"
#include "dash/oracle.h"
#include "dash/rollout.h"
#include "doctest.h"
#include "fixtures.h"

using namespace dash;
using namespace dash::testing;

TEST_CASE("tabulated and live environments agree bit for bit") {
  const ToyModel m = tiny_model(4);
  Rng rng(2);
  const ScaleTable scales = random_scales(m.n_layers(), rng);
  const auto samples = recall_samples(3, 5);
  for (const Sample& s : samples) {
    LiveEnv live(m, scales, s, Readout::kLastToken);
    TabulatedEnv tab(m, scales, s, Readout::kLastToken);
    for (const Path& p : enumerate_paths(m.n_layers())) {
      const PathOutcome a = live.outcome(p);
      const PathOutcome b = tab.outcome(p);
      CHECK(a.predicted == b.predicted);
      CHECK(a.nll_sum == b.nll_sum);
      for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const std::span<const LayerState> prefix(p.data(), i);
        CHECK(live.feature(prefix, FeatureSource::kTrue) == tab.feature(prefix, FeatureSource::kTrue));
        CHECK(live.feature(prefix, FeatureSource::kApprox) == tab.feature(prefix, FeatureSource::kApprox));
      }
    }
  }
}

TEST_CASE("live environment outcome equals a direct forward pass") {
  const ToyModel m = tiny_model(6);
  Rng rng(3);
  const ScaleTable scales = random_scales(m.n_layers(), rng);
  const Sample s = recall_samples(1, 9)[0];
  LiveEnv env(m, scales, s, Readout::kMeanPool);
  const Path p = path_from_string("41204");
  const Matrix logits = m.forward_with_path(s.tokens, p, scales);
  CHECK(env.outcome(p).predicted == predict_last(logits));
  const Path prefix = path_from_string("41");
  const auto stream = m.residual_stream(s.tokens, p, scales);
  CHECK(env.feature(prefix, FeatureSource::kTrue) == readout(stream[2], Readout::kMeanPool));
  CHECK(env.feature(prefix, FeatureSource::kApprox) ==
        approximate_next_hidden(readout(stream[1], Readout::kMeanPool), scales.lookup(2)));
}

TEST_CASE("rollouts respect boundary rules and the action set") {
  const ToyModel m = tiny_model();
  const auto samples = recall_samples(4, 2);
  const auto envs = tabulate(m, ScaleTable::identity(m.n_layers()), samples, Readout::kLastToken);
  Rng rng(5);
  const ActionSet a = ActionSet::of({LayerState::kSkip, LayerState::kInt8, LayerState::kFull});
  for (int seed = 0; seed < 10; ++seed) {
    const ScorerParams p = ScorerParams::init(dims_for(m), 0.0, static_cast<std::uint64_t>(seed));
    RolloutPolicy pol{a, FeatureSource::kTrue, seed % 2 == 0, 1.0};
    const Episode ep = rollout(p, *envs[static_cast<std::size_t>(seed) % envs.size()], pol, &rng);
    CHECK(satisfies_boundary_rules(ep.trace.states));
    CHECK(ep.trace.steps.size() == static_cast<std::size_t>(m.n_layers() - 2));
    for (LayerState s : ep.trace.states) CHECK(a.allows(s));
    for (std::size_t i = 0; i < ep.trace.steps.size(); ++i) {
      CHECK(ep.trace.steps[i].layer == static_cast<int>(i) + 2);
      CHECK(ep.trace.steps[i].prev == ep.trace.states[i]);
    }
  }
}

TEST_CASE("path enumeration") {
  const auto paths = enumerate_paths(6);
  CHECK(paths.size() == 256);
  CHECK(std::is_sorted(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](LayerState x, LayerState y) { return slot(x) < slot(y); });
  }));
  std::set<Path> unique(paths.begin(), paths.end());
  CHECK(unique.size() == 256);
  for (const Path& p : paths) CHECK(satisfies_boundary_rules(p));
  CHECK(path_string(paths.front()) == "400004");
  CHECK(path_string(paths.back()) == "444444");
  CHECK(enumerate_paths(3).size() == 4);
  CHECK_THROWS_AS(enumerate_paths(9), Error);
}

TEST_CASE("oracle path evaluation agrees with the environments") {
  const ToyModel m = tiny_model(7);
  Rng rng(4);
  const ScaleTable scales = random_scales(m.n_layers(), rng);
  const auto samples = recall_samples(20, 6);
  const auto envs = tabulate(m, scales, samples, Readout::kLastToken);
  for (const Path& p : enumerate_paths(m.n_layers())) {
    const PathEvaluation e = evaluate_path(m, p, scales, samples);
    std::vector<PathOutcome> o;
    for (const auto& env : envs) o.push_back(env->outcome(p));
    CHECK(e.quality == aggregate_quality(o));
    CHECK(e.cost == path_cost(p));
  }
  CHECK(evaluate_path(m, full_path(5), scales, samples).distance == 0.0);
}

TEST_CASE("pareto frontier properties") {
  std::vector<PathEvaluation> evals;
  Rng rng(8);
  for (const Path& p : enumerate_paths(6)) {
    PathEvaluation e;
    e.path = p;
    e.cost = path_cost(p);
    e.quality = std::round(rng.uniform() * 20) / 20 + (p == full_path(6) ? 2.0 : 0.0);
    evals.push_back(e);
  }
  const auto f = pareto_frontier(evals);
  CHECK(std::is_sorted(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; }));
  for (const auto& x : f) {
    for (const auto& y : evals) {
      const bool dominates = y.cost <= x.cost && y.quality >= x.quality && (y.cost < x.cost || y.quality > x.quality);
      CHECK_FALSE(dominates);
    }
  }
  for (const auto& y : evals) {
    const auto best = frontier_quality_at(f, y.cost);
    REQUIRE(best);
    CHECK(*best >= y.quality);
  }
  CHECK(std::any_of(f.begin(), f.end(), [](const auto& e) { return e.path == full_path(6); }));
  CHECK_FALSE(frontier_quality_at(f, 3.0));
}

TEST_CASE("random skip baseline draws paths near the target cost") {
  Rng rng(1);
  std::vector<int> costs;
  const PathQualityFn q = [&](const Path& p) {
    costs.push_back(path_cost(p));
    return static_cast<double>(path_cost(p));
  };
  const BaselineResult r = random_skip_baseline(q, 6, 14.0, 300, rng);
  CHECK(r.qualities.size() == 300);
  for (int c : costs) CHECK(std::abs(c - 14) <= 1);
  CHECK(r.mean == doctest::Approx(14.0).epsilon(0.05));
  CHECK(r.stddev > 0.0);
  costs.clear();
  Rng rng2(2);
  const BaselineResult big = random_skip_baseline(q, 12, 30.0, 50, rng2);
  for (int c : costs) CHECK(std::abs(c - 30) <= 1);
  CHECK(big.qualities.size() == 50);
  CHECK_THROWS_AS(random_skip_baseline(q, 6, 3.0, 10, rng), Error);
}
