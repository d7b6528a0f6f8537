// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings. Paths cross the boundary as digit strings ("424144"),
// matrices as 2-D float64 numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dash/calibration.h"
#include "dash/checkpoint.h"
#include "dash/experiment.h"
#include "dash/oracle.h"
#include "dash/profiler.h"
#include "dash/rewards.h"
#include "dash/runtime.h"

namespace py = pybind11;
using namespace dash;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict trace_dict(const DecisionTrace& t) {
  py::list steps;
  for (const auto& s : t.steps) {
    py::dict d;
    d["layer"] = s.layer;
    d["prev"] = code(s.prev);
    d["chosen"] = code(s.chosen);
    d["scores"] = std::vector<double>(s.scores.values.begin(), s.scores.values.end());
    d["fallback"] = s.fallback;
    steps.append(d);
  }
  py::dict d;
  d["states"] = path_string(t.states);
  d["steps"] = steps;
  return d;
}

py::dict run_dict(const RunResult& r) {
  py::dict d;
  d["logits"] = to_numpy(r.logits);
  d["prediction"] = predict_last(r.logits);
  d["mode"] = to_string(r.report.mode);
  d["trace"] = trace_dict(r.report.trace);
  d["cost_ratio"] = r.report.realized_cost_ratio;
  d["fallback_count"] = r.report.fallback_count;
  return d;
}

py::dict profile_dict(const SimilarityProfile& p) {
  py::dict d;
  d["mean"] = p.mean;
  d["stddev"] = p.stddev;
  d["per_sample"] = p.per_sample;
  return d;
}

RuntimeOptions runtime_options(const std::string& readout, const std::string& actions,
                               const std::vector<int>& inject_timeout_layers) {
  RuntimeOptions o;
  o.readout = readout_from_string(readout);
  o.actions = action_set_from_string(actions);
  if (!inject_timeout_layers.empty()) {
    o.inject_timeout = [inject_timeout_layers](int layer) {
      return std::find(inject_timeout_layers.begin(), inject_timeout_layers.end(), layer) !=
             inject_timeout_layers.end();
    };
  }
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamic layer-skipping runtime for a toy transformer";

  py::register_exception<Error>(m, "DashError", PyExc_ValueError);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("n_layers", &ModelConfig::n_layers)
      .def_readwrite("d_model", &ModelConfig::d_model)
      .def_readwrite("n_heads", &ModelConfig::n_heads)
      .def_readwrite("d_ff", &ModelConfig::d_ff)
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("max_seq_len", &ModelConfig::max_seq_len)
      .def_readwrite("seed", &ModelConfig::seed);

  py::class_<ScaleTable>(m, "ScaleTable")
      .def(py::init([](std::vector<double> s) { return ScaleTable(std::move(s), 0, "python"); }))
      .def_static("identity", &ScaleTable::identity)
      .def("lookup", &ScaleTable::lookup)
      .def_property_readonly("scales", &ScaleTable::scales)
      .def_property_readonly("n_layers", &ScaleTable::n_layers);

  py::class_<ToyModel>(m, "ToyModel")
      .def_static("init", &ToyModel::init, py::arg("config"))
      .def_property_readonly("config", &ToyModel::config)
      .def_property_readonly("n_layers", &ToyModel::n_layers)
      .def("forward", [](const ToyModel& self, const std::vector<int>& tokens) { return to_numpy(self.forward(tokens)); })
      .def(
          "forward_with_path",
          [](const ToyModel& self, const std::vector<int>& tokens, const std::string& path, const ScaleTable& scales) {
            return to_numpy(self.forward_with_path(tokens, path_from_string(path), scales));
          },
          py::arg("tokens"), py::arg("path"), py::arg("scales"));

  py::class_<ScorerParams>(m, "Scorer")
      .def_static(
          "init",
          [](int d_h, int n_layers, int d_l, int d1, int d2, double alpha, std::uint64_t seed) {
            ScorerDims d;
            d.d_h = d_h;
            d.n_layers = n_layers;
            d.d_l = d_l;
            d.d1 = d1;
            d.d2 = d2;
            return ScorerParams::init(d, alpha, seed);
          },
          py::arg("d_h"), py::arg("n_layers"), py::arg("d_l") = 16, py::arg("d1") = 64, py::arg("d2") = 64,
          py::arg("alpha") = 0.0, py::arg("seed") = 1)
      .def(
          "score",
          [](const ScorerParams& self, const std::vector<double>& h, int layer, int prev) {
            const CandidateScores s = score_candidates(self, h, layer, state_from_code(prev));
            return std::vector<double>(s.values.begin(), s.values.end());
          },
          py::arg("h"), py::arg("layer"), py::arg("prev"), "Scores for next states 0, 1, 2, 4.");

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_static("load", &load_checkpoint)
      .def("save", [](const Checkpoint& self, const std::string& path) { save_checkpoint(path, self); })
      .def_property_readonly("model", &Checkpoint::model)
      .def_readonly("scales", &Checkpoint::scales)
      .def_readonly("scorer", &Checkpoint::scorer)
      .def_readonly("config_hash", &Checkpoint::config_hash)
      .def_readonly("seed", &Checkpoint::seed);

  m.def("path_cost", [](const std::string& p) { return path_cost(path_from_string(p)); });
  m.def("cost_ratio", [](const std::string& p) { return cost_ratio(path_from_string(p)); });
  m.def("softmax_with_temperature", [](const std::vector<double>& s, double tau) { return softmax_with_temperature(s, tau); });
  m.def("position_weight", [](const std::string& p, int l) {
    const Path path = path_from_string(p);
    return position_weight(path, l, static_cast<int>(path.size()));
  });
  m.def("efficiency_reward", [](int state, double beta) { return efficiency_reward(state_from_code(state), beta); });
  m.def(
      "acc_reward_perplexity",
      [](double ppl_full, double ppl_skip, double epsilon, const std::string& mode) {
        RewardConfig c;
        c.epsilon = epsilon;
        c.ppl_mode = ppl_reward_mode_from_string(mode);
        return acc_reward_perplexity(ppl_full, ppl_skip, c);
      },
      py::arg("ppl_full"), py::arg("ppl_skip"), py::arg("epsilon") = 1.0, py::arg("mode") = "difference");

  m.def(
      "compute_scale_table",
      [](const ToyModel& model, const std::vector<std::vector<int>>& calib) { return compute_scale_table(model, calib); },
      py::arg("model"), py::arg("calibration_inputs"));
  m.def("io_similarity_profile", [](const ToyModel& model, const std::vector<std::vector<int>>& inputs) {
    return profile_dict(io_similarity_profile(model, inputs));
  });
  m.def("adjacent_similarity_profile", [](const ToyModel& model, const std::vector<std::vector<int>>& inputs) {
    return profile_dict(adjacent_similarity_profile(model, inputs));
  });

  m.def(
      "run_sync",
      [](const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales, const std::vector<int>& tokens,
         const std::string& readout, const std::string& actions) {
        return run_dict(run_sync(model, scorer, scales, tokens, runtime_options(readout, actions, {})));
      },
      py::arg("model"), py::arg("scorer"), py::arg("scales"), py::arg("tokens"), py::arg("readout") = "last_token",
      py::arg("actions") = "0124");
  m.def(
      "run_async",
      [](const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales, const std::vector<int>& tokens,
         const std::string& readout, const std::string& actions, const std::vector<int>& inject_timeout_layers) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_async(model, scorer, scales, tokens, runtime_options(readout, actions, inject_timeout_layers));
        }
        return run_dict(r);
      },
      py::arg("model"), py::arg("scorer"), py::arg("scales"), py::arg("tokens"), py::arg("readout") = "last_token",
      py::arg("actions") = "0124", py::arg("inject_timeout_layers") = std::vector<int>{});
  m.def(
      "async_reference_trace",
      [](const ToyModel& model, const ScorerParams& scorer, const ScaleTable& scales, const std::vector<int>& tokens,
         const std::string& readout, const std::string& actions, const std::vector<int>& inject_timeout_layers) {
        return trace_dict(
            async_reference_trace(model, scorer, scales, tokens, runtime_options(readout, actions, inject_timeout_layers)));
      },
      py::arg("model"), py::arg("scorer"), py::arg("scales"), py::arg("tokens"), py::arg("readout") = "last_token",
      py::arg("actions") = "0124", py::arg("inject_timeout_layers") = std::vector<int>{});

  m.def(
      "enumerate_paths", [](int n_layers) {
        std::vector<std::string> out;
        for (const auto& p : enumerate_paths(n_layers)) out.push_back(path_string(p));
        return out;
      });
}
