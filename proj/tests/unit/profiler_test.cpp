// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "dash/base_training.h"
#include "dash/profiler.h"
#include "doctest.h"
#include "fixtures.h"

using namespace dash;
using namespace dash::testing;

namespace {

ToyModel with_identity_layer(int layer) {
  ModelWeights w = tiny_model().weights();
  auto& l = w.layers[static_cast<std::size_t>(layer - 1)];
  l.wo.fill(0.0);
  l.w2.fill(0.0);
  std::fill(l.b2.begin(), l.b2.end(), 0.0);
  return ToyModel(tiny_config(), w);
}

std::vector<std::vector<int>> inputs(int n) {
  Rng rng(3);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) out.push_back(random_tokens(rng, 3 + i));
  return out;
}

}  // namespace

TEST_CASE("a layer that adds nothing has input/output similarity one") {
  const ToyModel m = with_identity_layer(3);
  const auto in = inputs(4);
  const SimilarityProfile io = io_similarity_profile(m, in);
  CHECK(io.mean[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(io.stddev[2] == doctest::Approx(0.0).epsilon(1e-9));
  const SimilarityProfile adj = adjacent_similarity_profile(m, in);
  CHECK(adj.mean[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("profiles have one entry per layer and sample, in range, deterministic") {
  const ToyModel m = tiny_model();
  const auto in = inputs(5);
  for (auto fn : {io_similarity_profile, adjacent_similarity_profile}) {
    const SimilarityProfile p = fn(m, in);
    CHECK(p.n_layers == m.n_layers());
    CHECK(p.mean.size() == static_cast<std::size_t>(m.n_layers()));
    CHECK(p.per_sample.size() == in.size());
    CHECK(p.per_token.size() == in.size());
    for (std::size_t s = 0; s < in.size(); ++s) {
      CHECK(p.per_token[s].rows() == static_cast<std::size_t>(m.n_layers()));
      CHECK(p.per_token[s].cols() == in[s].size());
      for (double v : p.per_sample[s]) CHECK((v >= -1.0 && v <= 1.0));
    }
    const SimilarityProfile q = fn(m, in);
    CHECK(q.per_sample == p.per_sample);
    std::ostringstream os;
    write_similarity_csv(os, p);
    const std::string csv = os.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + m.n_layers() * static_cast<long>(in.size()));
    CHECK(csv.rfind("layer,sample_id,similarity\n", 0) == 0);
  }
  CHECK_THROWS_AS(io_similarity_profile(m, std::vector<std::vector<int>>{}), Error);
}

TEST_CASE("static skip sweep") {
  const ToyModel m = tiny_model(9);
  const auto samples = recall_samples(30, 4);
  const auto sweep = static_skip_sweep(m, samples, m.n_layers() - 2);
  REQUIRE(sweep.size() == static_cast<std::size_t>(m.n_layers() - 1));
  const ScaleTable id = ScaleTable::identity(m.n_layers());
  CHECK(sweep[0].quality == evaluate_accuracy(m, samples, full_path(m.n_layers()), id));
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    CHECK(sweep[k].k == static_cast<int>(k));
    CHECK(path_cost(sweep[k].path) == 4 * (m.n_layers() - static_cast<int>(k)));
    CHECK((sweep[k].quality >= 0.0 && sweep[k].quality <= 1.0));
    if (k > 0) {
      // Skips are nested: the k-skip path contains the (k-1)-skip path's skips.
      for (std::size_t i = 0; i < sweep[k].path.size(); ++i) {
        if (sweep[k - 1].path[i] == LayerState::kSkip) CHECK(sweep[k].path[i] == LayerState::kSkip);
      }
    }
  }
  std::ostringstream os;
  write_sweep_csv(os, sweep);
  CHECK(os.str().rfind("k,accuracy\n0,", 0) == 0);
  CHECK_THROWS_AS(static_skip_sweep(m, samples, m.n_layers() - 1), Error);
}

TEST_CASE("skip order ranks decidable layers by similarity") {
  SimilarityProfile p;
  p.n_layers = 6;
  p.mean = {0.1, 0.5, 0.9, 0.5, 0.95, 0.2};
  CHECK(skip_order(p) == std::vector<int>{5, 3, 2, 4});  // ties keep the lower layer first
  p.mean = {0.1, 0.5, 0.9, 0.7, 0.95, 0.2};
  CHECK(skip_order(p) == std::vector<int>{5, 3, 4, 2});
  CHECK(path_string(static_skip_path(skip_order(p), 2, 6)) == "440404");
  CHECK_THROWS_AS(static_skip_path(skip_order(p), 5, 6), Error);
}
