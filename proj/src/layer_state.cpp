// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/layer_state.h"

#include "dash/numerics.h"

namespace dash {

LayerState state_from_code(int c) {
  switch (c) {
    case 0: return LayerState::kSkip;
    case 1: return LayerState::kInt4;
    case 2: return LayerState::kInt8;
    case 4: return LayerState::kFull;
    default: throw Error("unknown layer state code " + std::to_string(c));
  }
}

int path_cost(std::span<const LayerState> path) {
  int total = 0;
  for (LayerState s : path) total += cost_units(s);
  return total;
}

double cost_ratio(std::span<const LayerState> path) {
  if (path.empty()) throw Error("cost_ratio: empty path");
  return static_cast<double>(path_cost(path)) / (4.0 * static_cast<double>(path.size()));
}

std::string path_string(std::span<const LayerState> path) {
  std::string out;
  out.reserve(path.size());
  for (LayerState s : path) out.push_back(static_cast<char>('0' + code(s)));
  return out;
}

Path path_from_string(const std::string& s) {
  Path p;
  p.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9') throw Error("path string must contain only state digits: " + s);
    p.push_back(state_from_code(c - '0'));
  }
  return p;
}

Path full_path(int n_layers) { return Path(static_cast<std::size_t>(n_layers), LayerState::kFull); }

bool satisfies_boundary_rules(std::span<const LayerState> path) {
  return !path.empty() && path.front() == LayerState::kFull && path.back() == LayerState::kFull;
}

ActionSet ActionSet::of(std::initializer_list<LayerState> states) {
  std::uint8_t m = 0;
  for (LayerState s : states) m |= static_cast<std::uint8_t>(1U << slot(s));
  return from_mask(m);
}

ActionSet ActionSet::from_mask(std::uint8_t mask) {
  if ((mask & 0b1111) == 0 || (mask & ~0b1111) != 0) throw Error("invalid action mask");
  // Full precision must stay available so that fallbacks are always legal.
  if (!((mask >> slot(LayerState::kFull)) & 1U)) throw Error("action set must include state 4");
  return ActionSet(mask);
}

std::vector<LayerState> ActionSet::states() const {
  std::vector<LayerState> out;
  for (LayerState s : kAllStates) {
    if (allows(s)) out.push_back(s);
  }
  return out;
}

std::string ActionSet::to_string() const {
  std::string out;
  for (LayerState s : states()) out.push_back(static_cast<char>('0' + code(s)));
  return out;
}

ActionSet action_set_from_string(const std::string& s) {
  std::uint8_t m = 0;
  for (char c : s) {
    switch (c) {
      case '0': m |= 1U << slot(LayerState::kSkip); break;
      case '1': m |= 1U << slot(LayerState::kInt4); break;
      case '2': m |= 1U << slot(LayerState::kInt8); break;
      case '4': m |= 1U << slot(LayerState::kFull); break;
      default: throw Error("invalid action set '" + s + "' (digits 0, 1, 2, 4)");
    }
  }
  return ActionSet::from_mask(m);
}

}  // namespace dash
