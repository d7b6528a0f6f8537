// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/checkpoint.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dash {

using nlohmann::json;

namespace {

json mat(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

Matrix mat(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

json weights_json(const ModelWeights& w) {
  json layers = json::array();
  for (const LayerWeights& l : w.layers) {
    layers.push_back({{"ln1_gain", l.ln1_gain},
                      {"ln1_bias", l.ln1_bias},
                      {"wq", mat(l.wq)},
                      {"wk", mat(l.wk)},
                      {"wv", mat(l.wv)},
                      {"wo", mat(l.wo)},
                      {"ln2_gain", l.ln2_gain},
                      {"ln2_bias", l.ln2_bias},
                      {"w1", mat(l.w1)},
                      {"b1", l.b1},
                      {"w2", mat(l.w2)},
                      {"b2", l.b2}});
  }
  return {{"tok_emb", mat(w.tok_emb)}, {"pos_emb", mat(w.pos_emb)}, {"layers", layers},
          {"lnf_gain", w.lnf_gain},    {"lnf_bias", w.lnf_bias},    {"w_out", mat(w.w_out)}};
}

ModelWeights weights_from(const json& j) {
  ModelWeights w;
  w.tok_emb = mat(j.at("tok_emb"));
  w.pos_emb = mat(j.at("pos_emb"));
  for (const json& l : j.at("layers")) {
    LayerWeights x;
    x.ln1_gain = l.at("ln1_gain").get<Vector>();
    x.ln1_bias = l.at("ln1_bias").get<Vector>();
    x.wq = mat(l.at("wq"));
    x.wk = mat(l.at("wk"));
    x.wv = mat(l.at("wv"));
    x.wo = mat(l.at("wo"));
    x.ln2_gain = l.at("ln2_gain").get<Vector>();
    x.ln2_bias = l.at("ln2_bias").get<Vector>();
    x.w1 = mat(l.at("w1"));
    x.b1 = l.at("b1").get<Vector>();
    x.w2 = mat(l.at("w2"));
    x.b2 = l.at("b2").get<Vector>();
    w.layers.push_back(std::move(x));
  }
  w.lnf_gain = j.at("lnf_gain").get<Vector>();
  w.lnf_bias = j.at("lnf_bias").get<Vector>();
  w.w_out = mat(j.at("w_out"));
  return w;
}

json config_json(const ModelConfig& c) {
  return {{"n_layers", c.n_layers}, {"d_model", c.d_model},       {"n_heads", c.n_heads},
          {"d_ff", c.d_ff},         {"vocab_size", c.vocab_size}, {"max_seq_len", c.max_seq_len},
          {"seed", c.seed}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json scorer_json(const ScorerParams& p) {
  return {{"format", kScorerFormat},
          {"dims",
           {{"d_h", p.dims.d_h},
            {"d_l", p.dims.d_l},
            {"d1", p.dims.d1},
            {"d2", p.dims.d2},
            {"n_layers", p.dims.n_layers},
            {"head", to_string(p.dims.head)}}},
          {"w1", mat(p.w1)},
          {"w2", mat(p.w2)},
          {"w3", mat(p.w3)},
          {"emb", mat(p.emb)},
          {"alpha_penalty", p.alpha_penalty}};
}

ScorerParams scorer_from(const json& j) {
  if (j.at("format").get<std::string>() != kScorerFormat) throw Error("checkpoint: unsupported scorer format");
  ScorerParams p;
  const json& d = j.at("dims");
  p.dims.d_h = d.at("d_h").get<int>();
  p.dims.d_l = d.at("d_l").get<int>();
  p.dims.d1 = d.at("d1").get<int>();
  p.dims.d2 = d.at("d2").get<int>();
  p.dims.n_layers = d.at("n_layers").get<int>();
  p.dims.head = scorer_head_from_string(d.at("head").get<std::string>());
  p.w1 = mat(j.at("w1"));
  p.w2 = mat(j.at("w2"));
  p.w3 = mat(j.at("w3"));
  p.emb = mat(j.at("emb"));
  p.alpha_penalty = j.at("alpha_penalty").get<double>();
  p.validate();
  return p;
}

}  // namespace

std::string checkpoint_to_json_text(const Checkpoint& ckpt) {
  if (!ckpt.weights.all_finite()) throw Error("checkpoint: model weights are not finite");
  json j;
  j["format"] = kCheckpointFormat;
  j["config_hash"] = ckpt.config_hash;
  j["seed"] = ckpt.seed;
  j["model"] = {{"config", config_json(ckpt.config)}, {"weights", weights_json(ckpt.weights)}};
  if (ckpt.scales) {
    j["scale_table"] = {{"scales", ckpt.scales->scales()},
                        {"calib_size", ckpt.scales->calib_size()},
                        {"fingerprint", ckpt.scales->fingerprint()}};
  }
  if (ckpt.scorer) {
    if (!ckpt.scorer->all_finite()) throw Error("checkpoint: scorer parameters are not finite");
    j["scorer"] = scorer_json(*ckpt.scorer);
  }
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_json_text(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (!j.contains("format") || j.at("format").get<std::string>() != kCheckpointFormat) {
      throw Error(std::string("checkpoint: not a ") + kCheckpointFormat + " document");
    }
    Checkpoint c;
    c.config_hash = j.at("config_hash").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.config = config_from(j.at("model").at("config"));
    c.weights = weights_from(j.at("model").at("weights"));
    (void)c.model();  // shape check
    if (j.contains("scale_table")) {
      const json& s = j.at("scale_table");
      c.scales = ScaleTable(s.at("scales").get<std::vector<double>>(), s.at("calib_size").get<std::size_t>(),
                            s.at("fingerprint").get<std::string>());
      if (c.scales->n_layers() != c.config.n_layers) throw Error("checkpoint: scale table length != n_layers");
    }
    if (j.contains("scorer")) {
      c.scorer = scorer_from(j.at("scorer"));
      if (c.scorer->dims.n_layers != c.config.n_layers || c.scorer->dims.d_h != c.config.d_model) {
        throw Error("checkpoint: scorer does not match the model");
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string text = checkpoint_to_json_text(ckpt);
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json_text(ss.str());
}

}  // namespace dash
