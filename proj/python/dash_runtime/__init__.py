# Copyright 2026 The DASH Runtime Authors
# SPDX-License-Identifier: Apache-2.0
"""Dynamic layer-skipping runtime for a toy transformer."""

from ._core import *  # noqa: F401,F403

__all__ = [
    "Checkpoint",
    "DashError",
    "ModelConfig",
    "ScaleTable",
    "Scorer",
    "ToyModel",
    "acc_reward_perplexity",
    "adjacent_similarity_profile",
    "async_reference_trace",
    "compute_scale_table",
    "cost_ratio",
    "efficiency_reward",
    "enumerate_paths",
    "io_similarity_profile",
    "path_cost",
    "position_weight",
    "run_async",
    "run_sync",
    "softmax_with_temperature",
]
