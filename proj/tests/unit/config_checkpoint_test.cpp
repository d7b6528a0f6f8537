// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include "dash/budget.h"
#include "dash/checkpoint.h"
#include "dash/config.h"
#include "dash/experiment.h"
#include "doctest.h"
#include "fixtures.h"

using namespace dash;
using namespace dash::testing;
namespace fs = std::filesystem;

TEST_CASE("configuration round trip and overrides") {
  const RunConfig d = RunConfig::defaults();
  const RunConfig back = config_from_json_text(config_to_json_text(d));
  CHECK(config_to_json_text(back) == config_to_json_text(d));
  CHECK(config_hash(back) == config_hash(d));
  CHECK(config_hash(d).size() == 16);

  const RunConfig c = config_from_json_text(R"({"reward": {"beta": 0.3}, "model": {"seed": 9}, "targets": [2.0]})");
  CHECK(c.reward.beta == 0.3);
  CHECK(c.model.seed == 9);
  CHECK(c.targets == std::vector<double>{2.0});
  CHECK(c.reward.lambda == d.reward.lambda);
  CHECK(config_hash(c) != config_hash(d));
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(config_from_json_text("{"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"reward": {"gamma": 1}})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"reward": {"beta": "high"}})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"reward": {"epsilon": 0}})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"targets": [0.5]})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"scorer_train": {"actions": "12"}})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"task": {"vocab_size": 12}})"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/dash.json"), Error);
}

TEST_CASE("checkpoint round trip is exact and byte-stable") {
  const ToyModel m = tiny_model();
  Rng rng(3);
  Checkpoint ck;
  ck.config = m.config();
  ck.weights = m.weights();
  ck.scales = random_scales(m.n_layers(), rng);
  ck.scorer = ScorerParams::init(dims_for(m), 0.25, 4);
  ck.config_hash = "0123456789abcdef";
  ck.seed = 17;
  const std::string text = checkpoint_to_json_text(ck);
  const Checkpoint back = checkpoint_from_json_text(text);
  CHECK(back.weights == ck.weights);
  CHECK(back.config == ck.config);
  CHECK(back.scales->scales() == ck.scales->scales());
  CHECK(*back.scorer == *ck.scorer);
  CHECK(back.seed == 17);
  CHECK(checkpoint_to_json_text(back) == text);
  CHECK(text.find("\"format\":\"dash-ckpt-v1\"") != std::string::npos);
  CHECK(text.find("\"scorer-v1\"") != std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "dash_ckpt_test" / "nested";
  fs::remove_all(dir.parent_path());
  save_checkpoint((dir / "a.json").string(), ck);
  save_checkpoint((dir / "b.json").string(), ck);
  std::ifstream a(dir / "a.json"), b(dir / "b.json");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(load_checkpoint((dir / "a.json").string()).weights == ck.weights);
  fs::remove_all(dir.parent_path());
}

TEST_CASE("checkpoint rejects foreign or damaged documents") {
  CHECK_THROWS_AS(checkpoint_from_json_text("{}"), Error);
  CHECK_THROWS_AS(checkpoint_from_json_text(R"({"format": "other"})"), Error);
  CHECK_THROWS_AS(checkpoint_from_json_text(R"({"format": "dash-ckpt-v1"})"), Error);
  CHECK_THROWS_AS(checkpoint_from_json_text("not json"), Error);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), Error);
}

TEST_CASE("static skip count for a speedup") {
  CHECK(static_skips_for(1.33, 6) == 2);
  CHECK(static_skips_for(1.67, 6) == 3);
  CHECK(static_skips_for(2.0, 6) == 3);
  CHECK(static_skips_for(4.0, 6) == 4);
}

TEST_CASE("budget controller at no speedup keeps beta at zero") {
  const ToyModel m = tiny_model();
  const auto envs = tabulate(m, ScaleTable::identity(m.n_layers()), recall_samples(6, 1), Readout::kLastToken);
  ScorerParams init = ScorerParams::init(dims_for(m), 0.0, 3);
  init.w3.fill(0.0);  // starts at full precision everywhere
  ScorerTrainOptions o;
  o.steps = 2;
  o.batch_size = 2;
  RewardConfig frozen;
  frozen.lambda = 0.0;  // the policy stays at its initialization
  const BudgetPoint p = fit_budget(init, envs, envs, frozen, o, 1.0);
  CHECK(p.beta == 0.0);
  CHECK(p.attained);
  CHECK(p.trainings == 1);
  CHECK_THROWS_AS(fit_budget(init, envs, envs, frozen, o, 0.5), Error);
}

TEST_CASE("budget controller reports an unreachable target instead of throwing") {
  const ToyModel m = tiny_model();
  const auto envs = tabulate(m, ScaleTable::identity(m.n_layers()), recall_samples(4, 2), Readout::kLastToken);
  const ScorerParams init = ScorerParams::init(dims_for(m), 0.0, 3);
  ScorerTrainOptions o;
  o.steps = 3;
  o.batch_size = 2;
  o.actions = ActionSet::of({LayerState::kInt8, LayerState::kFull});
  BudgetOptions b;
  b.beta_max = 1.0;
  b.max_iters = 2;
  b.grid_points = 1;
  b.seed_retries = 0;
  // int8 everywhere costs at least 14 / 20 = 0.7 > 1 / 3.
  const BudgetPoint p = fit_budget(init, envs, envs, RewardConfig{}, o, 3.0, b);
  CHECK_FALSE(p.attained);
  CHECK(p.fit_ratio >= 0.7 - 1e-12);
}
