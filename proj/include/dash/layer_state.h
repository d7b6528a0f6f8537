// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dash {

/// Per-layer execution state. The numeric code doubles as the layer's cost
/// in cost units: skip (scale compensation only), simulated 4-bit,
/// simulated 8-bit, full precision.
enum class LayerState : std::uint8_t { kSkip = 0, kInt4 = 1, kInt8 = 2, kFull = 4 };

inline constexpr std::array<LayerState, 4> kAllStates = {LayerState::kSkip, LayerState::kInt4,
                                                         LayerState::kInt8, LayerState::kFull};

constexpr int code(LayerState s) { return static_cast<int>(s); }
constexpr int cost_units(LayerState s) { return static_cast<int>(s); }

/// Position of a state inside kAllStates (0..3).
constexpr int slot(LayerState s) {
  switch (s) {
    case LayerState::kSkip: return 0;
    case LayerState::kInt4: return 1;
    case LayerState::kInt8: return 2;
    case LayerState::kFull: return 3;
  }
  return 3;
}

/// Throws dash::Error for anything outside {0, 1, 2, 4}.
LayerState state_from_code(int code);

using Path = std::vector<LayerState>;

int path_cost(std::span<const LayerState> path);
/// Sum of cost units over 4 * L.
double cost_ratio(std::span<const LayerState> path);
/// Digits of the state codes, e.g. "424144".
std::string path_string(std::span<const LayerState> path);
Path path_from_string(const std::string& s);
Path full_path(int n_layers);

/// First and last layer must run at full precision.
bool satisfies_boundary_rules(std::span<const LayerState> path);

/// Subset of states the decision policy may choose from.
class ActionSet {
 public:
  constexpr ActionSet() = default;
  static ActionSet all() { return ActionSet(0b1111); }
  static ActionSet of(std::initializer_list<LayerState> states);
  static ActionSet from_mask(std::uint8_t mask);

  bool allows(LayerState s) const { return (mask_ >> slot(s)) & 1U; }
  std::uint8_t mask() const { return mask_; }
  std::vector<LayerState> states() const;
  std::string to_string() const;

  friend bool operator==(ActionSet, ActionSet) = default;

 private:
  constexpr explicit ActionSet(std::uint8_t mask) : mask_(mask) {}
  std::uint8_t mask_ = 0b1111;
};

/// Parses the digits of to_string(), e.g. "024".
ActionSet action_set_from_string(const std::string& s);

}  // namespace dash
