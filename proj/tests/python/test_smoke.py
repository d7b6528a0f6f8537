# Copyright 2026 The DASH Runtime Authors
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import dash_runtime as dr


@pytest.fixture(scope="module")
def model():
    cfg = dr.ModelConfig()
    cfg.n_layers = 5
    cfg.d_model = 16
    cfg.n_heads = 2
    cfg.d_ff = 32
    cfg.seed = 4
    return dr.ToyModel.init(cfg)


@pytest.fixture(scope="module")
def scorer(model):
    return dr.Scorer.init(d_h=16, n_layers=model.n_layers, d_l=4, d1=16, d2=16, seed=2)


def test_path_costs():
    assert dr.path_cost("424014") == 15
    assert dr.cost_ratio("4444") == 1.0
    assert len(dr.enumerate_paths(6)) == 256


def test_reward_formulas():
    assert dr.efficiency_reward(0, 0.1) == pytest.approx(0.4)
    assert dr.position_weight("4444", 2) == pytest.approx(0.476287, rel=1e-6)
    assert dr.acc_reward_perplexity(10.0, 15.0) == pytest.approx(-0.4)
    assert dr.acc_reward_perplexity(10.0, 10.0, mode="literal_sum") == pytest.approx(-1.9)
    p = dr.softmax_with_temperature([2.0, 0.0, 0.0, 0.0], 1.0)
    assert math.isclose(sum(p), 1.0)


def test_full_path_matches_forward(model, scorer):
    tokens = [1, 5, 3, 7, 2]
    scales = dr.ScaleTable.identity(model.n_layers)
    ref = model.forward(tokens)
    assert isinstance(ref, np.ndarray) and ref.shape == (5, 16)
    assert np.array_equal(model.forward_with_path(tokens, "44444", scales), ref)
    out = dr.run_sync(model, scorer, scales, tokens, actions="4")
    assert out["trace"]["states"] == "44444"
    assert np.array_equal(out["logits"], ref)


def test_async_matches_reference_and_falls_back(model, scorer):
    tokens = [3, 1, 4, 1, 5, 9, 2, 6]
    scales = dr.compute_scale_table(model, [tokens, [2, 7, 1, 8]])
    assert len(scales.scales) == model.n_layers
    out = dr.run_async(model, scorer, scales, tokens)
    ref = dr.async_reference_trace(model, scorer, scales, tokens)
    assert out["trace"] == ref
    assert out["fallback_count"] == 0
    forced = dr.run_async(model, scorer, scales, tokens, inject_timeout_layers=[3])
    step = next(s for s in forced["trace"]["steps"] if s["layer"] == 3)
    assert step["chosen"] == 4 and step["fallback"]
    assert forced["fallback_count"] == 1


def test_similarity_profiles(model):
    inputs = [[1, 2, 3, 4], [5, 6, 7, 8, 9]]
    io = dr.io_similarity_profile(model, inputs)
    adj = dr.adjacent_similarity_profile(model, inputs)
    assert len(io["mean"]) == model.n_layers
    assert all(-1.0 <= v <= 1.0 for v in adj["mean"])


def test_errors_surface_as_exceptions(model):
    with pytest.raises(dr.DashError):
        dr.path_cost("4354")
    with pytest.raises(dr.DashError):
        model.forward_with_path([1, 2], "04444", dr.ScaleTable.identity(model.n_layers))
