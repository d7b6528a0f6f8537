// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// "dash-ckpt-v1": one JSON document (sorted keys, round-trip exact doubles)
// holding the base model and, once produced, the scale table and scorer.

#pragma once

#include <optional>
#include <string>

#include "dash/model.h"
#include "dash/policy.h"
#include "dash/scale_table.h"

namespace dash {

inline constexpr const char* kCheckpointFormat = "dash-ckpt-v1";
inline constexpr const char* kScorerFormat = "scorer-v1";

struct Checkpoint {
  ModelConfig config;
  ModelWeights weights;
  std::optional<ScaleTable> scales;
  std::optional<ScorerParams> scorer;
  /// Provenance: hash of the run configuration and the seed of the stage
  /// that last wrote the file.
  std::string config_hash;
  std::uint64_t seed = 0;

  ToyModel model() const { return ToyModel(config, weights); }
};

std::string checkpoint_to_json_text(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json_text(const std::string& text);

/// Creates missing parent directories.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws dash::Error when the file is missing, malformed, or of another
/// format.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dash
