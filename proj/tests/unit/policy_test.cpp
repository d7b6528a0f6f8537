// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>

#include "dash/policy.h"
#include "doctest.h"
#include "fixtures.h"

using namespace dash;
using namespace dash::testing;

namespace {

// Straight-line scorer: two GELU layers on [h; E(l); E(l+1)], then the
// transition penalty.
std::array<double, 4> reference_scores(const ScorerParams& p, const std::vector<double>& h, int layer,
                                       LayerState prev) {
  std::vector<double> x = h;
  for (std::size_t j = 0; j < p.emb.cols(); ++j) x.push_back(p.emb(static_cast<std::size_t>(layer), j));
  for (std::size_t j = 0; j < p.emb.cols(); ++j) x.push_back(p.emb(static_cast<std::size_t>(layer + 1), j));
  auto layer_fn = [](const std::vector<double>& in, const Matrix& w, bool act) {
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t c = 0; c < w.cols(); ++c) {
      long double s = 0;
      for (std::size_t r = 0; r < w.rows(); ++r) s += static_cast<long double>(in[r]) * w(r, c);
      out[c] = act ? 0.5 * static_cast<double>(s) * std::erfc(-static_cast<double>(s) / std::sqrt(2.0))
                   : static_cast<double>(s);
    }
    return out;
  };
  const auto a1 = layer_fn(x, p.w1, true);
  const auto a2 = layer_fn(a1, p.w2, true);
  const auto base = layer_fn(a2, p.w3, false);
  std::array<double, 4> out{};
  const int codes[4] = {0, 1, 2, 4};
  for (int k = 0; k < 4; ++k) {
    const double b = base.size() == 4 ? base[static_cast<std::size_t>(k)] : base[0];
    out[static_cast<std::size_t>(k)] = b - p.alpha_penalty * (codes[k] - code(prev));
  }
  return out;
}

}  // namespace

TEST_CASE("scorer matches a straight-line re-implementation") {
  const ToyModel m = tiny_model();
  Rng rng(21);
  for (ScorerHead head : {ScorerHead::kPerCandidate, ScorerHead::kShared}) {
    const ScorerParams p = ScorerParams::init(dims_for(m, head), 0.3, 17);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> h(8);
      for (double& v : h) v = rng.uniform(-2, 2);
      const int layer = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(m.n_layers() - 1)));
      const LayerState prev = kAllStates[rng.index(4)];
      const CandidateScores got = score_candidates(p, h, layer, prev);
      const auto want = reference_scores(p, h, layer, prev);
      for (int k = 0; k < 4; ++k) CHECK(got.values[k] == doctest::Approx(want[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("scorer input validation") {
  const ToyModel m = tiny_model();
  const ScorerParams p = ScorerParams::init(dims_for(m), 0.0, 1);
  std::vector<double> h(8, 0.1);
  CHECK_THROWS_AS(score_candidates(p, std::vector<double>(7, 0.0), 1, LayerState::kFull), Error);
  CHECK_THROWS_AS(score_candidates(p, h, 0, LayerState::kFull), Error);
  CHECK_THROWS_AS(score_candidates(p, h, m.n_layers(), LayerState::kFull), Error);
  h[2] = std::nan("");
  CHECK_THROWS_AS(score_candidates(p, h, 1, LayerState::kFull), Error);
  CHECK_THROWS_AS(ScorerParams::init(dims_for(m), -1.0, 1), Error);
}

TEST_CASE("transition penalty shifts scores by alpha times the code difference") {
  const ToyModel m = tiny_model();
  ScorerParams p = ScorerParams::init(dims_for(m), 0.0, 3);
  const std::vector<double> h(8, 0.25);
  const CandidateScores plain = score_candidates(p, h, 2, LayerState::kInt8);
  p.alpha_penalty = 0.5;
  const CandidateScores pen = score_candidates(p, h, 2, LayerState::kInt8);
  for (LayerState s : kAllStates) CHECK(pen[s] == doctest::Approx(plain[s] - 0.5 * (code(s) - 2)));
}

TEST_CASE("scorer backward matches finite differences") {
  const ToyModel m = tiny_model();
  ScorerParams p = ScorerParams::init(dims_for(m), 0.1, 5);
  Rng rng(8);
  std::vector<double> h(8);
  for (double& v : h) v = rng.uniform(-1, 1);
  CandidateScores upstream;
  for (double& v : upstream.values) v = rng.uniform(-1, 1);
  auto objective = [&](const ScorerParams& q) {
    const CandidateScores s = score_candidates(q, h, 2, LayerState::kInt4);
    double o = 0;
    for (int k = 0; k < 4; ++k) o += s.values[k] * upstream.values[k];
    return o;
  };
  ScorerCache cache;
  (void)score_candidates(p, h, 2, LayerState::kInt4, &cache);
  ScorerParams g = ScorerParams::zeros_like(p);
  scorer_backward(p, cache, upstream, g);
  std::vector<std::pair<std::vector<double>*, std::vector<double>*>> pairs;
  for_each_scorer_tensor(p, g, [&](std::vector<double>& w, std::vector<double>& gw) { pairs.emplace_back(&w, &gw); });
  for (auto [w, gw] : pairs) {
    for (int probe = 0; probe < 6; ++probe) {
      const std::size_t i = rng.index(w->size());
      const double orig = (*w)[i];
      (*w)[i] = orig + 1e-5;
      const double up = objective(p);
      (*w)[i] = orig - 1e-5;
      const double down = objective(p);
      (*w)[i] = orig;
      const double numeric = (up - down) / 2e-5;
      CHECK(std::abs(numeric - (*gw)[i]) <= 1e-8 + 1e-5 * std::abs(numeric));
    }
  }
}

TEST_CASE("greedy selection") {
  CandidateScores s;
  s[LayerState::kSkip] = 0.1;
  s[LayerState::kInt4] = 0.9;
  s[LayerState::kInt8] = 0.3;
  s[LayerState::kFull] = 0.2;
  CHECK(greedy_next_state(s) == LayerState::kInt4);
  CHECK(greedy_next_state(s, ActionSet::of({LayerState::kSkip, LayerState::kFull})) == LayerState::kFull);
  SUBCASE("ties resolve to the more expensive state") {
    CandidateScores t;
    t.values = {1.0, 1.0, 0.0, 1.0};
    CHECK(greedy_next_state(t) == LayerState::kFull);
    t.values = {1.0, 1.0, 0.0, 0.5};
    CHECK(greedy_next_state(t) == LayerState::kInt4);
  }
  SUBCASE("greedy picks the argmax of the sampling distribution") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      CandidateScores r;
      for (double& v : r.values) v = rng.uniform(-3, 3);
      const Vector p = candidate_probabilities(r, 0.7);
      const LayerState g = greedy_next_state(r);
      for (double q : p) CHECK(p[static_cast<std::size_t>(slot(g))] >= q);
    }
  }
}

TEST_CASE("sampler frequencies follow the softmax") {
  Rng rng(77);
  CandidateScores s;
  s.values = {0.3, -0.5, 1.2, 0.0};
  const double tau = 0.8;
  const Vector p = candidate_probabilities(s, tau);
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(slot(sample_next_state(s, tau, rng)))];
  double l1 = 0;
  for (int k = 0; k < 4; ++k) l1 += std::abs(static_cast<double>(counts[k]) / n - p[k]);
  CHECK(l1 < 0.03);

  SUBCASE("masked states are never drawn") {
    const ActionSet a = ActionSet::of({LayerState::kSkip, LayerState::kFull});
    for (int i = 0; i < 2000; ++i) {
      const LayerState x = sample_next_state(s, tau, rng, a);
      CHECK(a.allows(x));
    }
  }
}

TEST_CASE("action sets") {
  CHECK(ActionSet::all().to_string() == "0124");
  CHECK(action_set_from_string("04").states() == std::vector<LayerState>{LayerState::kSkip, LayerState::kFull});
  CHECK_THROWS_AS(action_set_from_string("02"), Error);
  CHECK_THROWS_AS(action_set_from_string("4x"), Error);
  CHECK_THROWS_AS(ActionSet::from_mask(0), Error);
}
