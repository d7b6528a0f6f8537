// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// dash: command-line driver for every pipeline stage.
//
//   dash train-base   --config cfg.json --out runs/a
//   dash calibrate    --checkpoint runs/a/dash_ckpt.json
//   dash train-scorer --checkpoint runs/a/dash_ckpt.json --target-ratio 1.67
//   dash infer        --checkpoint runs/a/dash_ckpt.json --mode async --input 3,9,1,12
//
// Exit status: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dash/base_training.h"
#include "dash/checkpoint.h"
#include "dash/config.h"
#include "dash/experiment.h"
#include "dash/runtime.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dash;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string checkpoint;
  std::optional<double> target;
};

struct Context {
  RunConfig cfg;
  std::string hash;
  std::uint64_t seed = 0;
  fs::path out_dir;
  std::string checkpoint;
};

Context make_context(const CommonArgs& a, const std::function<std::uint64_t&(RunConfig&)>& stage_seed) {
  Context c;
  c.cfg = a.config_path.empty() ? RunConfig::defaults() : load_config(a.config_path);
  if (a.seed) stage_seed(c.cfg) = *a.seed;
  if (a.target) c.cfg.target = *a.target;
  if (!a.out_dir.empty()) c.cfg.out_dir = a.out_dir;
  if (!a.checkpoint.empty()) {
    c.cfg.checkpoint = a.checkpoint;
  } else if (!a.out_dir.empty() && fs::path(c.cfg.checkpoint).is_relative()) {
    c.cfg.checkpoint = (fs::path(a.out_dir) / c.cfg.checkpoint).string();
  }
  c.cfg.validate();
  c.seed = stage_seed(c.cfg);
  c.hash = config_hash(c.cfg);
  c.out_dir = c.cfg.out_dir;
  c.checkpoint = c.cfg.checkpoint;
  return c;
}

std::ofstream open_report(const Context& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  const fs::path p = c.out_dir / name;
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  os.precision(17);
  os << "# config_hash=" << c.hash << ",seed=" << c.seed << '\n';
  return os;
}

Checkpoint require_checkpoint(const Context& c) {
  if (!fs::exists(c.checkpoint)) throw Error("checkpoint not found: " + c.checkpoint);
  Checkpoint ck = load_checkpoint(c.checkpoint);
  if (ck.config != c.cfg.model) throw Error("checkpoint model does not match the configuration");
  return ck;
}

void stamp(Checkpoint& ck, const Context& c) {
  ck.config_hash = c.hash;
  ck.seed = c.seed;
}

int cmd_train_base(const Context& c) {
  BaseTrainReport rep;
  const ToyModel model = train_base(c.cfg, &rep);
  Checkpoint ck;
  ck.config = model.config();
  ck.weights = model.weights();
  stamp(ck, c);
  save_checkpoint(c.checkpoint, ck);
  if (c.cfg.task.kind == TaskKind::kMarkov) {
    std::printf("val_perplexity=%.6f steps=%d checkpoint=%s\n", rep.val_perplexity, rep.steps, c.checkpoint.c_str());
  } else {
    std::printf("val_accuracy=%.6f steps=%d checkpoint=%s\n", rep.val_accuracy, rep.steps, c.checkpoint.c_str());
  }
  return 0;
}

int cmd_profile(const Context& c) {
  const ToyModel model = require_checkpoint(c).model();
  const SampleSplit s = experiment_samples(c.cfg);
  std::vector<std::vector<int>> inputs;
  for (const Sample& x : s.eval) inputs.push_back(x.tokens);
  {
    std::ofstream os = open_report(c, "io_similarity.csv");
    write_similarity_csv(os, io_similarity_profile(model, inputs));
  }
  {
    std::ofstream os = open_report(c, "adjacent_similarity.csv");
    write_similarity_csv(os, adjacent_similarity_profile(model, inputs));
  }
  const auto sweep = static_skip_sweep(model, s.eval, model.n_layers() - 2);
  std::ofstream os = open_report(c, "static_sweep.csv");
  write_sweep_csv(os, sweep);
  for (const SweepPoint& p : sweep) std::printf("k=%d accuracy=%.6f path=%s\n", p.k, p.quality, path_string(p.path).c_str());
  return 0;
}

int cmd_calibrate(const Context& c) {
  Checkpoint ck = require_checkpoint(c);
  ck.scales = calibrate(c.cfg, ck.model());
  stamp(ck, c);
  save_checkpoint(c.checkpoint, ck);
  std::printf("scales=");
  for (std::size_t i = 0; i < ck.scales->scales().size(); ++i) {
    std::printf("%s%.6f", i ? "," : "", ck.scales->scales()[i]);
  }
  std::printf(" calib_size=%zu fingerprint=%s\n", ck.scales->calib_size(), ck.scales->fingerprint().c_str());
  for (const auto& w : ck.scales->warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return 0;
}

Checkpoint require_scales(const Context& c) {
  Checkpoint ck = require_checkpoint(c);
  if (!ck.scales) throw Error("checkpoint has no scale table; run calibrate first");
  return ck;
}

int cmd_train_scorer(const Context& c) {
  Checkpoint ck = require_scales(c);
  ToyModel model = ck.model();
  const RunConfig& cfg = c.cfg;
  const double speedup = cfg.target;
  const SampleSplit s = experiment_samples(cfg);
  ScorerParams init = scorer_init(cfg);
  ScorerTrainOptions opts = scorer_options(cfg);
  RewardConfig reward = cfg.reward;
  std::ofstream log = open_report(c, "train_log.csv");
  ScorerTrainResult result;
  std::vector<std::unique_ptr<EpisodeEnv>> eval_envs;
  if (opts.mode == TrainMode::kCoTrain) {
    result = co_train(init, model, *ck.scales, s.train, cfg.scorer.readout, reward, opts, &log);
    ck.weights = model.weights();
    eval_envs = live_envs(model, *ck.scales, s.eval, cfg.scorer.readout);
  } else {
    EnvSet envs = make_envs(model, *ck.scales, s, cfg.scorer.readout);
    if (cfg.budget_enabled) {
      const BudgetPoint fit = fit_budget(init, envs.train, envs.train, reward, opts, speedup, cfg.budget);
      reward.beta = fit.beta;
      opts.seed = fit.seed;
      std::printf("budget: target_ratio=%.6f beta=%.6f fit_ratio=%.6f attained=%d trainings=%d\n", 1.0 / speedup,
                  fit.beta, fit.fit_ratio, fit.attained ? 1 : 0, fit.trainings);
    }
    result = train_scorer(init, envs.train, reward, opts, &log);
    eval_envs = std::move(envs.eval);
  }
  const PolicyEvaluation e = evaluate_policy(result.params, eval_envs, opts.actions, opts.source);
  ck.scorer = std::move(result.params);
  stamp(ck, c);
  save_checkpoint(c.checkpoint, ck);
  std::printf("beta=%.6f mean_cost_ratio=%.6f quality=%.6f checkpoint=%s\n", reward.beta, e.mean_cost_ratio,
              e.quality, c.checkpoint.c_str());
  return 0;
}

std::vector<int> parse_tokens(const std::string& text) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error("--input: expected comma-separated integers, got '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error("--input: no tokens");
  return out;
}

int cmd_infer(const Context& c, const std::string& mode_text, const std::string& input) {
  const Checkpoint ck = require_scales(c);
  if (!ck.scorer) throw Error("checkpoint has no scorer; run train-scorer first");
  const PipelineMode mode = pipeline_mode_from_string(mode_text);
  const ToyModel model = ck.model();
  const std::vector<int> tokens = input.empty() ? experiment_samples(c.cfg).eval.front().tokens : parse_tokens(input);
  RuntimeOptions ro;
  ro.readout = c.cfg.scorer.readout;
  ro.actions = c.cfg.scorer_train.actions;
  const RunResult r = mode == PipelineMode::kSync ? run_sync(model, *ck.scorer, *ck.scales, tokens, ro)
                                                  : run_async(model, *ck.scorer, *ck.scales, tokens, ro);
  nlohmann::json j;
  j["config_hash"] = c.hash;
  j["seed"] = c.seed;
  j["mode"] = to_string(r.report.mode);
  j["trace"] = path_string(r.report.trace.states);
  j["cost_ratio"] = r.report.realized_cost_ratio;
  j["fallback_count"] = r.report.fallback_count;
  j["prediction"] = predict_last(r.logits);
  j["layer_seconds"] = r.report.trace.layer_seconds;
  j["decision_overhead_seconds"] = r.report.decision_overhead_seconds;
  std::vector<double> score_seconds;
  for (const auto& st : r.report.trace.steps) score_seconds.push_back(st.score_seconds);
  j["score_seconds"] = score_seconds;
  const std::string text = j.dump(2);
  std::printf("%s\n", text.c_str());
  fs::create_directories(c.out_dir);
  std::ofstream(c.out_dir / "infer_report.json") << text << '\n';
  return 0;
}

int cmd_bench(const Context& c) {
  const Checkpoint ck = require_scales(c);
  const ToyModel model = ck.model();
  BenchOptions opts;
  opts.ladder_target = c.cfg.target;
  const BenchResult r = run_bench(c.cfg, model, *ck.scales, opts, &std::cerr);
  {
    std::ofstream os = open_report(c, "bench.csv");
    write_bench_csv(os, r.rows);
  }
  std::ofstream os = open_report(c, "frontier.csv");
  write_frontier_csv(os, r.frontier);
  std::printf("%-28s %8s %10s %9s %6s\n", "method", "target", "ratio", "quality", "seed");
  for (const BenchRow& row : r.rows) {
    std::printf("%-28s %8.2f %10.4f %9.4f %6llu%s\n", row.method.c_str(), row.target, row.achieved_ratio, row.quality,
                static_cast<unsigned long long>(row.seed), row.attained ? "" : "  unattained");
  }
  return 0;
}

int cmd_oracle(const Context& c) {
  const Checkpoint ck = require_scales(c);
  const ToyModel model = ck.model();
  const SampleSplit s = experiment_samples(c.cfg);
  std::vector<PathEvaluation> evals;
  for (const Path& p : enumerate_paths(model.n_layers())) evals.push_back(evaluate_path(model, p, *ck.scales, s.eval));
  {
    std::ofstream os = open_report(c, "paths.csv");
    os << "cost,quality,distance,path\n";
    for (const auto& e : evals) os << e.cost << ',' << e.quality << ',' << e.distance << ',' << path_string(e.path) << '\n';
  }
  const auto frontier = pareto_frontier(evals);
  std::ofstream os = open_report(c, "frontier.csv");
  write_frontier_csv(os, frontier);
  for (const auto& e : frontier) std::printf("cost=%d quality=%.6f path=%s\n", e.cost, e.quality, path_string(e.path).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic layer skipping and precision selection for a toy transformer"};
  app.require_subcommand(1);
  CommonArgs common;
  std::string mode = "sync";
  std::string input;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Seed of this stage (overrides the configuration)");
    sub->add_option("--out", common.out_dir, "Directory for reports (and the checkpoint by default)");
    sub->add_option("--checkpoint", common.checkpoint, "Checkpoint path");
  };
  CLI::App* train_base_cmd = app.add_subcommand("train-base", "Train the base model and write a checkpoint");
  CLI::App* profile_cmd = app.add_subcommand("profile", "Layer similarity profiles and the static-skip sweep");
  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "Compute the skip scale table into the checkpoint");
  CLI::App* train_scorer_cmd = app.add_subcommand("train-scorer", "Train the scorer into the checkpoint");
  CLI::App* infer_cmd = app.add_subcommand("infer", "Run one input through the dynamic pipeline");
  CLI::App* bench_cmd = app.add_subcommand("bench", "Methods-by-speedup comparison table");
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Evaluate every path and the Pareto frontier");
  for (CLI::App* sub : {train_base_cmd, profile_cmd, calibrate_cmd, train_scorer_cmd, infer_cmd, bench_cmd, oracle_cmd}) {
    add_common(sub);
  }
  for (CLI::App* sub : {train_scorer_cmd, bench_cmd}) {
    sub->add_option("--target-ratio", common.target, "Target speedup, e.g. 1.67")->check(CLI::Range(1.0, 4.0));
  }
  infer_cmd->add_option("--mode", mode, "sync or async")->check(CLI::IsMember({"sync", "async"}));
  infer_cmd->add_option("--input", input, "Comma-separated token ids (default: first evaluation sample)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (train_base_cmd->parsed()) return cmd_train_base(make_context(common, [](RunConfig& c) -> std::uint64_t& { return c.model.seed; }));
    if (calibrate_cmd->parsed()) {
      return cmd_calibrate(make_context(common, [](RunConfig& c) -> std::uint64_t& { return c.calibration.seed; }));
    }
    if (train_scorer_cmd->parsed()) {
      return cmd_train_scorer(make_context(common, [](RunConfig& c) -> std::uint64_t& { return c.scorer_train.seed; }));
    }
    auto eval_seed = [](RunConfig& c) -> std::uint64_t& { return c.eval.seed; };
    if (profile_cmd->parsed()) return cmd_profile(make_context(common, eval_seed));
    if (infer_cmd->parsed()) return cmd_infer(make_context(common, eval_seed), mode, input);
    if (bench_cmd->parsed()) return cmd_bench(make_context(common, eval_seed));
    if (oracle_cmd->parsed()) return cmd_oracle(make_context(common, eval_seed));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
