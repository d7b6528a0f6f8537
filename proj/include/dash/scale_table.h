// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dash {

/// Per-layer multiplicative factors applied to a skipped layer's input.
class ScaleTable {
 public:
  ScaleTable() = default;
  /// Every scale must be finite and > 0.
  ScaleTable(std::vector<double> scales, std::size_t calib_size, std::string fingerprint);

  static ScaleTable identity(int n_layers);

  /// 1-based layer index; throws dash::Error when out of range.
  double lookup(int layer_index) const;

  int n_layers() const { return static_cast<int>(scales_.size()); }
  const std::vector<double>& scales() const { return scales_; }
  std::size_t calib_size() const { return calib_size_; }
  const std::string& fingerprint() const { return fingerprint_; }

  std::vector<std::string> warnings;

 private:
  std::vector<double> scales_;
  std::size_t calib_size_ = 0;
  std::string fingerprint_;
};

inline double scale_lookup(const ScaleTable& table, int layer_index) { return table.lookup(layer_index); }

}  // namespace dash
