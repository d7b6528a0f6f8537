// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/calibration.h"

#include <algorithm>
#include <cmath>

namespace dash {

ScaleTable::ScaleTable(std::vector<double> scales, std::size_t calib_size, std::string fingerprint)
    : scales_(std::move(scales)), calib_size_(calib_size), fingerprint_(std::move(fingerprint)) {
  if (scales_.empty()) throw Error("ScaleTable: no layers");
  for (double s : scales_) {
    if (!std::isfinite(s) || s <= 0.0) throw Error("ScaleTable: scales must be finite and > 0");
  }
}

ScaleTable ScaleTable::identity(int n_layers) {
  if (n_layers <= 0) throw Error("ScaleTable::identity: n_layers must be positive");
  return ScaleTable(std::vector<double>(static_cast<std::size_t>(n_layers), 1.0), 0, "identity");
}

double ScaleTable::lookup(int layer_index) const {
  if (layer_index < 1 || layer_index > n_layers()) {
    throw Error("scale_lookup: layer index " + std::to_string(layer_index) + " out of range [1, " +
                std::to_string(n_layers()) + "]");
  }
  return scales_[static_cast<std::size_t>(layer_index - 1)];
}

std::string calibration_fingerprint(std::span<const std::vector<int>> calib) {
  std::vector<std::uint64_t> hashes;
  hashes.reserve(calib.size());
  for (const auto& seq : calib) hashes.push_back(hash_ints(seq));
  std::sort(hashes.begin(), hashes.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t v : hashes) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(&v);
    h = fnv1a({bytes, sizeof(v)}, h);
  }
  return hex64(h);
}

ScaleAccumulator::ScaleAccumulator(int n_layers)
    : sums_(static_cast<std::size_t>(n_layers)),
      counts_(static_cast<std::size_t>(n_layers), 0),
      skipped_(static_cast<std::size_t>(n_layers), 0) {}

void ScaleAccumulator::add(int layer_index, const Matrix& x, const Matrix& y) {
  if (layer_index < 1 || layer_index > static_cast<int>(sums_.size())) {
    throw Error("ScaleAccumulator: layer index out of range");
  }
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw Error("ScaleAccumulator: shape mismatch");
  const auto i = static_cast<std::size_t>(layer_index - 1);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const double nx = l2_norm(x.row(t));
    if (nx == 0.0) {
      ++skipped_[i];
      continue;
    }
    sums_[i].add(l2_norm(y.row(t)) / nx);
    ++counts_[i];
  }
}

ScaleTable ScaleAccumulator::finish(std::size_t calib_size, std::string fingerprint) const {
  std::vector<double> scales(sums_.size());
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    const std::string layer = std::to_string(i + 1);
    if (counts_[i] == 0) {
      throw Error("compute_scale_table: every calibration token had a zero-norm input at layer " + layer);
    }
    if (skipped_[i] > 0) {
      warnings.push_back("layer " + layer + ": skipped " + std::to_string(skipped_[i]) + " zero-norm token(s)");
    }
    scales[i] = sums_[i].value() / static_cast<double>(counts_[i]);
  }
  ScaleTable table(std::move(scales), calib_size, std::move(fingerprint));
  table.warnings = std::move(warnings);
  return table;
}

ScaleTable compute_scale_table(const ToyModel& model, std::span<const std::vector<int>> calib) {
  if (calib.empty()) throw Error("compute_scale_table: empty calibration set");
  const int L = model.n_layers();
  const Path full = full_path(L);
  const ScaleTable unused = ScaleTable::identity(L);
  ScaleAccumulator acc(L);
  for (const auto& seq : calib) {
    const auto stream = model.residual_stream(seq, full, unused);
    for (int l = 1; l <= L; ++l) {
      acc.add(l, stream[static_cast<std::size_t>(l - 1)], stream[static_cast<std::size_t>(l)]);
    }
  }
  return acc.finish(calib.size(), calibration_fingerprint(calib));
}

}  // namespace dash
