// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Trains the default toy model once, then checks every
// acceptance criterion and prints one PASS/FAIL line per criterion. Exits
// nonzero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dash/base_training.h"
#include "dash/calibration.h"
#include "dash/experiment.h"
#include "dash/oracle.h"
#include "dash/policy.h"
#include "dash/profiler.h"
#include "dash/rewards.h"
#include "dash/runtime.h"

using namespace dash;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  g_outcomes.push_back({id, name, pass, detail});
  std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel_err(double got, double want) {
  const double den = std::max(std::abs(got), std::abs(want));
  return den == 0.0 ? 0.0 : std::abs(got - want) / den;
}

std::vector<int> random_tokens(Rng& rng, int length, int vocab) {
  std::vector<int> t(static_cast<std::size_t>(length));
  for (int& v : t) v = static_cast<int>(rng.index(static_cast<std::size_t>(vocab)));
  return t;
}

Path random_path(Rng& rng, int L) {
  Path p = full_path(L);
  for (int j = 1; j + 1 < L; ++j) p[static_cast<std::size_t>(j)] = kAllStates[rng.index(4)];
  return p;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Straight-line references

double ref_gelu(double x) { return 0.5 * x * std::erfc(-x / std::sqrt(2.0)); }

std::array<double, 4> ref_scores(const ScorerParams& p, const std::vector<double>& h, int layer, LayerState prev) {
  const auto& d = p.dims;
  std::vector<double> x = h;
  for (int j = 0; j < d.d_l; ++j) x.push_back(p.emb(static_cast<std::size_t>(layer), static_cast<std::size_t>(j)));
  for (int j = 0; j < d.d_l; ++j) x.push_back(p.emb(static_cast<std::size_t>(layer + 1), static_cast<std::size_t>(j)));
  auto dense = [](const std::vector<double>& in, const Matrix& w, bool act) {
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t c = 0; c < w.cols(); ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < w.rows(); ++r) s += in[r] * w(r, c);
      out[c] = act ? ref_gelu(s) : s;
    }
    return out;
  };
  const auto base = dense(dense(dense(x, p.w1, true), p.w2, true), p.w3, false);
  const int codes[4] = {0, 1, 2, 4};
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const double b = base.size() == 4 ? base[static_cast<std::size_t>(k)] : base[0];
    out[static_cast<std::size_t>(k)] = b - p.alpha_penalty * (codes[k] - static_cast<int>(prev));
  }
  return out;
}

std::vector<double> ref_scale_table(const ToyModel& model, const std::vector<std::vector<int>>& calib) {
  const int L = model.n_layers();
  std::vector<double> sum(static_cast<std::size_t>(L), 0.0);
  std::vector<double> count(static_cast<std::size_t>(L), 0.0);
  const Path full = full_path(L);
  const ScaleTable id = ScaleTable::identity(L);
  for (const auto& tokens : calib) {
    const auto stream = model.residual_stream(tokens, full, id);
    for (int l = 0; l < L; ++l) {
      const Matrix& x = stream[static_cast<std::size_t>(l)];
      const Matrix& y = stream[static_cast<std::size_t>(l) + 1];
      for (std::size_t t = 0; t < x.rows(); ++t) {
        double nx = 0.0, ny = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
          nx += x(t, c) * x(t, c);
          ny += y(t, c) * y(t, c);
        }
        if (nx == 0.0) continue;
        sum[static_cast<std::size_t>(l)] += std::sqrt(ny) / std::sqrt(nx);
        count[static_cast<std::size_t>(l)] += 1.0;
      }
    }
  }
  for (int l = 0; l < L; ++l) sum[static_cast<std::size_t>(l)] /= count[static_cast<std::size_t>(l)];
  return sum;
}

double ref_position_weight(const Path& p, int l) {
  const int L = static_cast<int>(p.size());
  double total = 0.0, prefix = 0.0;
  for (int j = 0; j < L; ++j) {
    total += static_cast<int>(p[static_cast<std::size_t>(j)]);
    if (j < l) prefix += static_cast<int>(p[static_cast<std::size_t>(j)]);
  }
  const double z = static_cast<int>(p[static_cast<std::size_t>(l - 1)]) - 4.0 * L / total;
  return (total - prefix) / total * (1.0 / (1.0 + std::exp(-z)));
}

// ---------------------------------------------------------------------------

struct Trained {
  RunConfig cfg;
  ToyModel model;
  ScaleTable scales;
  SampleSplit samples;
};

void criterion_formulas(const Trained& t) {
  Rng rng(101);
  double worst = 0.0;
  int inputs = 0;
  const auto& m = t.model;
  const int L = m.n_layers();

  ScorerDims dims = t.cfg.scorer_dims();
  for (int i = 0; i < 120; ++i, ++inputs) {
    dims.head = i % 3 == 0 ? ScorerHead::kShared : ScorerHead::kPerCandidate;
    const ScorerParams p = ScorerParams::init(dims, rng.uniform(0.0, 0.5), 1000 + static_cast<std::uint64_t>(i));
    std::vector<double> h(static_cast<std::size_t>(dims.d_h));
    for (double& v : h) v = rng.uniform(-3.0, 3.0);
    const int layer = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(L - 1)));
    const LayerState prev = kAllStates[rng.index(4)];
    const CandidateScores got = score_candidates(p, h, layer, prev);
    const auto want = ref_scores(p, h, layer, prev);
    for (int k = 0; k < 4; ++k) worst = std::max(worst, rel_err(got.values[static_cast<std::size_t>(k)], want[static_cast<std::size_t>(k)]));
  }

  for (int i = 0; i < 100; ++i, ++inputs) {
    std::vector<std::vector<int>> calib;
    const int n = 1 + static_cast<int>(rng.index(6));
    for (int j = 0; j < n; ++j) {
      calib.push_back(random_tokens(rng, 2 + static_cast<int>(rng.index(static_cast<std::size_t>(m.config().max_seq_len - 1))),
                                    m.config().vocab_size));
    }
    const ScaleTable got = compute_scale_table(m, calib);
    const auto want = ref_scale_table(m, calib);
    for (int l = 0; l < L; ++l) worst = std::max(worst, rel_err(got.scales()[static_cast<std::size_t>(l)], want[static_cast<std::size_t>(l)]));
  }

  for (int i = 0; i < 200; ++i, ++inputs) {
    const int len = 3 + static_cast<int>(rng.index(10));
    const Path p = random_path(rng, len);
    const int l = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(len)));
    worst = std::max(worst, rel_err(position_weight(p, l, len), ref_position_weight(p, l)));
  }

  for (int i = 0; i < 200; ++i, ++inputs) {
    const LayerState s = kAllStates[rng.index(4)];
    const double beta = rng.uniform(0.0, 2.0);
    worst = std::max(worst, rel_err(efficiency_reward(s, beta), beta * (4 - static_cast<int>(s))));
    const double r_acc = rng.uniform(-1.0, 1.0), omega = rng.uniform(0.0, 1.0), r_eff = rng.uniform(0.0, 2.0);
    const StepReward r = step_reward(r_acc, omega, r_eff);
    worst = std::max(worst, rel_err(r.r, r_acc * omega + r_eff));
  }

  for (int i = 0; i < 200; ++i, ++inputs) {
    RewardConfig cfg;
    cfg.epsilon = rng.uniform(0.01, 5.0);
    cfg.ppl_mode = i % 2 ? PplRewardMode::kLiteralSum : PplRewardMode::kDifference;
    const double pf = rng.uniform(1.0, 50.0), ps = rng.uniform(1.0, 50.0);
    const double d = cfg.ppl_mode == PplRewardMode::kLiteralSum ? std::abs(pf + ps) : std::abs(pf - ps);
    worst = std::max(worst, rel_err(acc_reward_perplexity(pf, ps, cfg), (cfg.epsilon - d) / pf));
  }

  report(1, "formula oracles", worst < 1e-10,
         "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(inputs) + " random inputs");
}

void criterion_gradient(const Trained& t) {
  Rng rng(202);
  double worst = 0.0;
  const ScaleTable& scales = t.scales;
  for (int init = 0; init < 5; ++init) {
    const ScorerParams p0 =
        ScorerParams::init(t.cfg.scorer_dims(), 0.1 * init, 500 + static_cast<std::uint64_t>(init));
    LiveEnv env(t.model, scales, t.samples.eval[static_cast<std::size_t>(init)], t.cfg.scorer.readout);
    RolloutPolicy pol;
    pol.greedy = false;
    pol.tau = rng.uniform(0.3, 1.5);
    pol.source = init % 2 ? FeatureSource::kApprox : FeatureSource::kTrue;
    Episode ep = rollout(p0, env, pol, &rng);
    RewardConfig cfg;
    cfg.beta = rng.uniform(0.0, 0.5);
    assign_rewards(ep.trace, rng.uniform(-1.0, 1.0), cfg);
    std::vector<double> baselines(ep.trace.steps.size());
    for (double& b : baselines) b = rng.uniform(-0.5, 0.5);

    ScorerParams g = ScorerParams::zeros_like(p0);
    reinforce_gradient(p0, ep.trace, ep.features, pol.actions, g, baselines);
    ScorerParams p = p0;
    std::vector<std::pair<std::vector<double>*, std::vector<double>*>> tensors;
    for_each_scorer_tensor(p, g, [&](std::vector<double>& w, std::vector<double>& gw) { tensors.emplace_back(&w, &gw); });
    for (auto [w, gw] : tensors) {
      double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
      for (std::size_t i = 0; i < w->size(); ++i) {
        const double orig = (*w)[i];
        (*w)[i] = orig + 1e-5;
        const double up = reinforce_loss(p, ep.trace, ep.features, pol.actions, baselines);
        (*w)[i] = orig - 1e-5;
        const double down = reinforce_loss(p, ep.trace, ep.features, pol.actions, baselines);
        (*w)[i] = orig;
        const double numeric = (up - down) / 2e-5;
        diff2 += (numeric - (*gw)[i]) * (numeric - (*gw)[i]);
        a2 += (*gw)[i] * (*gw)[i];
        n2 += numeric * numeric;
      }
      const double den = std::sqrt(std::max(a2, n2));
      if (den > 0.0) worst = std::max(worst, std::sqrt(diff2) / den);
    }
  }
  report(2, "gradient check", worst < 1e-4,
         "max per-tensor relative error " + fmt("%.3g", worst) + " over 5 initializations (central step 1e-5)");
}

void criterion_sampler() {
  Rng rng(303);
  double worst = 0.0;
  constexpr int kDraws = 100000;
  for (int v = 0; v < 10; ++v) {
    CandidateScores s;
    for (double& x : s.values) x = rng.uniform(-2.0, 2.0);
    const double tau = rng.uniform(0.2, 2.0);
    const Vector want = softmax_with_temperature(s.span(), tau);
    std::array<int, 4> counts{};
    for (int d = 0; d < kDraws; ++d) ++counts[static_cast<std::size_t>(slot(sample_next_state(s, tau, rng)))];
    double l1 = 0.0;
    for (int k = 0; k < 4; ++k) l1 += std::abs(counts[static_cast<std::size_t>(k)] / double(kDraws) - want[static_cast<std::size_t>(k)]);
    worst = std::max(worst, l1);
  }
  report(3, "sampler fidelity", worst < 0.02, "max L1 distance " + fmt("%.4f", worst) + " over 10 score vectors x 1e5 draws");
}

void criterion_identity_path(const Trained& t) {
  Rng rng(404);
  RuntimeOptions opts;
  opts.actions = ActionSet::of({LayerState::kFull});
  opts.readout = t.cfg.scorer.readout;
  const ScorerParams scorer = ScorerParams::init(t.cfg.scorer_dims(), 0.0, 7);
  int identical = 0;
  for (int i = 0; i < 100; ++i) {
    const auto tokens =
        random_tokens(rng, 1 + static_cast<int>(rng.index(static_cast<std::size_t>(t.model.config().max_seq_len))),
                      t.model.config().vocab_size);
    const RunResult r = run_sync(t.model, scorer, t.scales, tokens, opts);
    if (r.logits == t.model.forward(tokens) && r.report.trace.states == full_path(t.model.n_layers())) ++identical;
  }
  report(4, "identity-path equivalence", identical == 100,
         std::to_string(identical) + "/100 inputs bit-identical to the plain forward pass");
}

void criterion_async(const Trained& t) {
  Rng rng(505);
  int equal = 0, equal_injected = 0, fallbacks = 0, bad_injected = 0, injected_total = 0;
  const int L = t.model.n_layers();
  for (int i = 0; i < 200; ++i) {
    ScorerDims dims = t.cfg.scorer_dims();
    const ScorerParams scorer = ScorerParams::init(dims, rng.uniform(0.0, 0.3), 9000 + static_cast<std::uint64_t>(i));
    const auto tokens =
        random_tokens(rng, 2 + static_cast<int>(rng.index(static_cast<std::size_t>(t.model.config().max_seq_len - 1))),
                      t.model.config().vocab_size);
    RuntimeOptions opts;
    opts.readout = t.cfg.scorer.readout;
    const RunResult r = run_async(t.model, scorer, t.scales, tokens, opts);
    if (same_decisions(r.report.trace, async_reference_trace(t.model, scorer, t.scales, tokens, opts))) ++equal;
    fallbacks += r.report.fallback_count;

    std::vector<bool> inject(static_cast<std::size_t>(L + 1), false);
    for (int l = 2; l < L; ++l) inject[static_cast<std::size_t>(l)] = rng.uniform() < 0.4;
    opts.inject_timeout = [inject](int layer) { return inject[static_cast<std::size_t>(layer)]; };
    const RunResult ri = run_async(t.model, scorer, t.scales, tokens, opts);
    if (same_decisions(ri.report.trace, async_reference_trace(t.model, scorer, t.scales, tokens, opts))) ++equal_injected;
    for (const auto& s : ri.report.trace.steps) {
      if (!inject[static_cast<std::size_t>(s.layer)]) continue;
      ++injected_total;
      if (s.chosen != LayerState::kFull || !s.fallback) ++bad_injected;
    }
  }
  const bool pass = equal == 200 && equal_injected == 200 && fallbacks == 0 && bad_injected == 0;
  report(5, "async decision-equivalence", pass,
         std::to_string(equal) + "/200 traces match the serial reference, " + std::to_string(equal_injected) +
             "/200 with injected timeouts, fallback_count " + std::to_string(fallbacks) + ", " +
             std::to_string(injected_total - bad_injected) + "/" + std::to_string(injected_total) +
             " injected timeouts fell back to state 4");
}

std::vector<const BenchRow*> rows_of(const BenchResult& b, const std::string& method, double target) {
  std::vector<const BenchRow*> out;
  for (const auto& r : b.rows) {
    if (r.method == method && std::abs(r.target - target) < 1e-9) out.push_back(&r);
  }
  return out;
}

void criterion_ladder(const BenchResult& b, double target) {
  const std::vector<std::string> ladder = {method::kStatic, method::kNoComp, method::kScale, method::kScaleInt8,
                                           method::kScaleInt8Int4};
  std::vector<double> means;
  std::string detail;
  for (const auto& name : ladder) {
    std::vector<double> q, ratio;
    for (const BenchRow* r : rows_of(b, name, target)) {
      q.push_back(r->quality);
      ratio.push_back(r->achieved_ratio);
    }
    means.push_back(q.empty() ? std::nan("") : mean(q));
    detail += (detail.empty() ? "" : " <= ") + name + " " + fmt("%.4f", means.back()) + "@" + fmt("%.3f", mean(ratio));
  }
  bool pass = true;
  for (std::size_t i = 0; i + 1 < means.size(); ++i) {
    if (!(means[i] <= means[i + 1] + 0.01)) pass = false;
  }
  report(6, "compensation ladder", pass, "mean quality@ratio at " + fmt("%.2f", target) + "x: " + detail);
}

void criterion_random_skip(const RunConfig& cfg, const BenchResult& b) {
  bool pass = true;
  std::string detail;
  for (double target : cfg.targets) {
    const auto dash_rows = rows_of(b, method::kDash, target);
    const auto rand_rows = rows_of(b, method::kRandom, target);
    std::vector<double> gaps;
    for (std::size_t i = 0; i < dash_rows.size() && i < rand_rows.size(); ++i) {
      gaps.push_back(dash_rows[i]->quality - rand_rows[i]->quality);
    }
    const double g = mean(gaps), se = sample_sd(gaps) / std::sqrt(static_cast<double>(gaps.size()));
    const bool ok = gaps.size() == static_cast<std::size_t>(cfg.eval.n_seeds) && g > 2.0 * se && g > 0.0;
    pass = pass && ok;
    detail += fmt("%.2fx: ", target) + "gap " + fmt("%.4f", g) + " vs 2SE " + fmt("%.4f", 2.0 * se) + "; ";
  }
  report(7, "DASH beats RandomSkip", pass, detail);
}

void criterion_budget(const RunConfig& cfg, const BenchResult& b, int n_layers) {
  bool pass = true;
  int checked = 0;
  double worst = 0.0;
  std::string detail;
  for (double target : cfg.targets) {
    if (1.0 / target < 8.0 / (4.0 * n_layers)) continue;
    for (const BenchRow* r : rows_of(b, method::kDash, target)) {
      const double gap = std::abs(r->achieved_ratio - 1.0 / target);
      worst = std::max(worst, gap);
      ++checked;
      if (gap > 0.02) {
        pass = false;
        detail += " miss " + fmt("%.2fx", target) + " seed " + std::to_string(r->seed) + " ratio " +
                  fmt("%.4f", r->achieved_ratio) + ";";
      }
    }
  }
  report(8, "budget controller", pass && checked > 0,
         std::to_string(checked) + " fitted policies, max |achieved - 1/target| " + fmt("%.4f", worst) + detail);
}

void criterion_frontier(const BenchResult& b, int n_layers) {
  double worst = -1.0;
  int checked = 0;
  for (const auto& r : b.rows) {
    if (r.method != method::kDash) continue;
    const auto best = frontier_quality_at(b.frontier, r.achieved_ratio * 4.0 * n_layers);
    ++checked;
    if (best) worst = std::max(worst, *best - r.quality);
  }
  report(9, "oracle near-optimality", checked > 0 && worst <= 0.05,
         std::to_string(checked) + " policies, max frontier advantage at equal-or-lower cost " + fmt("%.4f", worst) +
             " (frontier of " + std::to_string(b.frontier.size()) + " points)");
}

void criterion_observations(const Trained& t) {
  std::vector<std::vector<int>> inputs;
  for (const auto& s : t.samples.eval) inputs.push_back(s.tokens);
  const int L = t.model.n_layers();
  const SimilarityProfile adj = adjacent_similarity_profile(t.model, inputs);
  const auto argmin = std::min_element(adj.mean.begin(), adj.mean.end()) - adj.mean.begin();
  std::string adj_detail;
  for (double v : adj.mean) adj_detail += fmt(" %.3f", v);
  const bool a = argmin == 0;

  const auto sweep = static_skip_sweep(t.model, t.samples.eval, L - 2);
  const double n = static_cast<double>(t.samples.eval.size());
  bool monotone = true;
  std::string sweep_detail;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    sweep_detail += fmt(" %.3f", sweep[k].quality);
    if (k == 0) continue;
    const double p = 0.5 * (sweep[k].quality + sweep[k - 1].quality);
    const double noise = 2.0 * std::sqrt(2.0 * p * (1.0 - p) / n);
    if (sweep[k].quality > sweep[k - 1].quality + noise) monotone = false;
  }
  const double chance = 1.0 / t.cfg.task.n_keys;
  const bool near_chance = std::abs(sweep.back().quality - chance) <= 0.10;
  report(10, "observation replication", a && monotone && near_chance,
         std::string("(a) ") + (a ? "ok" : "FAIL") + " adjacent similarity by layer" + adj_detail + ", minimum at layer " +
             std::to_string(argmin + 1) + "; (b) " + (monotone && near_chance ? "ok" : "FAIL") + " sweep" +
             sweep_detail + ", chance " + fmt("%.3f", chance));
}

void criterion_scale_invariance(const Trained& t) {
  const auto calib = calibration_inputs(t.cfg);
  const ScaleTable base = compute_scale_table(t.model, calib);
  auto shuffled = calib;
  Rng rng(606);
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
  auto doubled = calib;
  doubled.insert(doubled.end(), calib.begin(), calib.end());
  double worst = 0.0;
  for (const auto& variant : {compute_scale_table(t.model, shuffled), compute_scale_table(t.model, doubled)}) {
    for (int l = 0; l < t.model.n_layers(); ++l) {
      worst = std::max(worst, rel_err(variant.scales()[static_cast<std::size_t>(l)], base.scales()[static_cast<std::size_t>(l)]));
    }
  }
  const bool same_fp = calibration_fingerprint(shuffled) == calibration_fingerprint(calib);
  report(11, "scale-table invariances", worst <= 1e-12 && same_fp,
         "max relative change under reordering/duplication " + fmt("%.3g", worst) + ", reorder fingerprint " +
             (same_fp ? "stable" : "changed"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  auto since = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  Trained t{RunConfig::defaults(), ToyModel::init(RunConfig::defaults().model), ScaleTable{}, {}};
  BaseTrainReport base_report;
  t.model = train_base(t.cfg, &base_report);
  t.scales = calibrate(t.cfg, t.model);
  t.samples = experiment_samples(t.cfg);
  std::printf("# base model: val accuracy %.4f after %d steps (%.1fs)\n", base_report.val_accuracy, base_report.steps,
              since());
  std::fflush(stdout);

  criterion_formulas(t);
  criterion_gradient(t);
  criterion_sampler();
  criterion_identity_path(t);
  criterion_async(t);
  criterion_observations(t);
  criterion_scale_invariance(t);

  std::printf("# running the method comparison (%d seeds)\n", t.cfg.eval.n_seeds);
  std::fflush(stdout);
  BenchOptions bo;
  bo.ladder_target = t.cfg.target;
  std::ofstream log("acceptance_bench.log");
  const BenchResult bench = run_bench(t.cfg, t.model, t.scales, bo, &log);
  {
    std::ofstream csv("acceptance_bench.csv");
    write_bench_csv(csv, bench.rows);
    std::ofstream fr("acceptance_frontier.csv");
    write_frontier_csv(fr, bench.frontier);
  }
  criterion_ladder(bench, t.cfg.target);
  criterion_random_skip(t.cfg, bench);
  criterion_budget(t.cfg, bench, t.model.n_layers());
  criterion_frontier(bench, t.model.n_layers());

  std::sort(g_outcomes.begin(), g_outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
  int failed = 0;
  std::printf("# summary (%.1fs)\n", since());
  for (const auto& o : g_outcomes) {
    std::printf("%s criterion %d (%s)\n", o.pass ? "PASS" : "FAIL", o.id, o.name.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("# %d/%zu criteria passed\n", static_cast<int>(g_outcomes.size()) - failed, g_outcomes.size());
  return failed == 0 ? 0 : 1;
}
