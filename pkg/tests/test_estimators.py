#
# Copyright (c) 2025 TUM Department of Electrical and Computer Engineering.
#
# This file is part of simulband.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Tests for the effect and effect-modification estimators."""
import numpy as np
import pandas as pd
import pytest

from simulband.errors import (
    EmptyAfterFiltering,
    EmptyArm,
    GridOutOfRange,
    InvalidArgument,
    MissingColumn,
    NonBinaryAction,
)
from simulband.estimators import (
    Dataset,
    SplineSpec,
    build_confounder_design,
    build_effects_model,
    build_emm_binary_ipw_model,
    build_emm_binary_model,
    build_emm_continuous_model,
    build_ipw_effects_model,
    linear_contrast,
    make_grid,
    predict_cace,
)
from simulband.estimators.msm import spline_layout
from simulband.mest import FitResult, solve
from simulband.settings import ColumnSettings
from simulband.types import SplineKind

from conftest import make_dataset


def saturated_ipw_weights(action, stratum):
    pi = np.empty(len(action))
    for level in np.unique(stratum):
        mask = stratum == level
        pi[mask] = action[mask].mean()
    return action / pi, (1 - action) / (1 - pi)


@pytest.fixture
def confounded():
    """Twelve rows with one binary confounder."""
    return make_dataset(
        {
            "a": [1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 1],
            "l": [0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1],
            "y1": [5.0, 7.0, 3.0, 4.0, 6.0, 2.0, 9.0, 11.0, 10.0, 6.0, 7.0, 12.0],
            "y2": [1.0, 2.0, 0.5, 1.5, 3.0, 1.0, 4.0, 3.5, 5.0, 2.0, 2.5, 4.5],
            "v": [0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1],
        },
        action="a",
        outcomes=["y1", "y2"],
        modifiers=["v"],
        confounders=["l"],
    )


@pytest.fixture
def regression_data():
    rng = np.random.default_rng(11)
    a = np.array([1, 0, 1, 0, 1, 0, 1, 0, 1, 1], dtype=float)
    v = np.array([0, 0, 1, 1, 0, 1, 1, 0, 1, 0], dtype=float)
    x = np.round(rng.uniform(100, 500, 10))
    y = 300 + 20 * a + 30 * v - 10 * a * v + rng.normal(0, 15, 10)
    return make_dataset({"a": a, "v": v, "x": x, "y": y}, action="a", outcomes=["y"], modifiers=["v", "x"])


# ingestion


def test_from_frame_drops_missing_rows():
    frame = pd.DataFrame({"a": [1, 0, 1, 0], "y": [1.0, np.nan, 3.0, 4.0], "unused": [np.nan] * 4})
    data = Dataset.from_frame(frame, ColumnSettings(action="a", outcomes=["y"]))
    assert data.n == 3
    assert data.dropped == 1
    assert data.diagnostics["rows_dropped"] == 1


def test_from_frame_missing_action_names_column():
    frame = pd.DataFrame({"y": [1.0, 2.0]})
    with pytest.raises(MissingColumn) as excinfo:
        Dataset.from_frame(frame, ColumnSettings(action="treat", outcomes=["y"]))
    assert excinfo.value.column == "treat"


def test_from_frame_rejects_non_binary_action():
    frame = pd.DataFrame({"a": [0, 1, 2], "y": [1.0, 2.0, 3.0]})
    with pytest.raises(NonBinaryAction):
        Dataset.from_frame(frame, ColumnSettings(action="a", outcomes=["y"]))


def test_from_frame_everything_filtered():
    frame = pd.DataFrame({"a": [0, 1], "y": [np.nan, np.nan]})
    with pytest.raises(EmptyAfterFiltering):
        Dataset.from_frame(frame, ColumnSettings(action="a", outcomes=["y"]))


def test_confounder_design_with_bins_and_categories():
    data = make_dataset(
        {
            "a": [0, 1, 0, 1, 0, 1],
            "karnof": [70, 80, 90, 95, 100, 100],
            "race": [0, 1, 0, 1, 1, 0],
            "age": [20, 30, 40, 50, 60, 35],
            "const": [1, 1, 1, 1, 1, 1],
        },
        action="a",
        confounders=["karnof", "race", "age", "const"],
    )
    design, names = build_confounder_design(
        data, ["karnof", "race", "age", "const"], categorical=["race"], bins={"karnof": [90, 100]}
    )
    assert names == ["intercept", "karnof[1]", "karnof[2]", "race[1]", "age"]
    np.testing.assert_array_equal(design[:, 1], [0, 0, 1, 1, 0, 0])
    np.testing.assert_array_equal(design[:, 2], [0, 0, 0, 0, 1, 1])


# effects


def test_effects_are_arm_mean_differences(toy_trial):
    fit = solve(build_effects_model(toy_trial), toy_trial)
    psi, _ = fit.interest
    assert psi[0] == pytest.approx(np.mean([10, 12, 9, 13]) - np.mean([7, 8, 6, 9]), abs=1e-10)
    assert psi[1] == pytest.approx(np.mean([3, 5, 4, 8]) - np.mean([2, 6, 1, 3]), abs=1e-10)
    assert fit.interest_names == ("psi1", "psi2")


def test_identical_outcome_in_both_arms_gives_zero_effect():
    data = make_dataset(
        {"a": [1, 1, 0, 0, 1, 0], "y1": [3.0] * 6, "y2": [1.0, 2.0, 3.0, 4.0, 5.0, 7.0]},
        action="a",
        outcomes=["y1", "y2"],
    )
    fit = solve(build_effects_model(data), data)
    assert fit.interest[0][0] == 0.0


def test_effects_need_both_arms():
    data = make_dataset(
        {"a": [1, 1, 1], "y1": [1.0, 2.0, 3.0], "y2": [1.0, 2.0, 3.0]}, action="a", outcomes=["y1", "y2"]
    )
    with pytest.raises(EmptyArm):
        build_effects_model(data, ["y1", "y2"])


def test_effects_need_two_outcomes(toy_trial):
    with pytest.raises(InvalidArgument):
        build_effects_model(toy_trial, ["y1"])


def test_ipw_effects_with_constant_confounder_equal_unweighted(toy_trial):
    data = make_dataset(
        {"a": toy_trial.action, "y1": toy_trial.column("y1"), "y2": toy_trial.column("y2"), "c": np.ones(8)},
        action="a",
        outcomes=["y1", "y2"],
        confounders=["c"],
    )
    ipw = solve(build_ipw_effects_model(data), data)
    plain = solve(build_effects_model(data), data)
    np.testing.assert_allclose(ipw.interest[0], plain.interest[0], atol=1e-8)


def test_ipw_effects_match_hajek_oracle(confounded):
    fit = solve(build_ipw_effects_model(confounded), confounded)
    a = confounded.action
    w1, w0 = saturated_ipw_weights(a, confounded.column("l"))
    expected = []
    for col in ("y1", "y2"):
        y = confounded.column(col)
        expected.append(np.sum(w1 * y) / np.sum(w1) - np.sum(w0 * y) / np.sum(w0))
    np.testing.assert_allclose(fit.interest[0], expected, atol=1e-8)
    assert fit.names[:2] == ("eta_intercept", "eta_l")
    # nuisance block is part of the covariance, bands only use the interest block
    assert fit.covariance.shape == (8, 8)
    assert fit.interest[1].shape == (2, 2)
    assert fit.diagnostics["propensity_clamped"] == 0


def test_ipw_effects_normalized_weights_sum_to_one(confounded):
    model = build_ipw_effects_model(confounded)
    fit = solve(model, confounded)
    p = model.layout.dim
    a = confounded.action
    w1, w0 = model.layout.weights(confounded, fit.theta_hat[:p])
    arms = {"mu1": a * w1, "mu0": (1 - a) * w0}
    y1 = confounded.column("y1")
    for name, weights in arms.items():
        normalized = weights / weights.sum()
        assert normalized.sum() == pytest.approx(1.0, abs=1e-10)
        assert fit.theta_hat[fit.names.index(name)] == pytest.approx(np.sum(normalized * y1), abs=1e-8)


# binary modification


def test_emm_binary_matches_normal_equations(regression_data):
    fit = solve(build_emm_binary_model(regression_data, "y", "v"), regression_data)
    a, v, y = regression_data.action, regression_data.column("v"), regression_data.column("y")
    x = np.column_stack([np.ones_like(a), a, v, a * v])
    oracle = np.linalg.solve(x.T @ x, x.T @ y)
    np.testing.assert_allclose(fit.theta_hat, oracle, atol=1e-8)
    assert fit.interest_names == ("beta0", "beta1", "beta2", "beta3")


def test_emm_binary_zero_outcome(regression_data):
    data = make_dataset(
        {"a": regression_data.action, "v": regression_data.column("v"), "y": np.zeros(10)},
        action="a",
        outcomes=["y"],
        modifiers=["v"],
    )
    fit = solve(build_emm_binary_model(data, "y", "v"), data)
    assert np.all(fit.theta_hat == 0.0)


def test_emm_binary_ipw_matches_weighted_normal_equations(confounded):
    fit = solve(build_emm_binary_ipw_model(confounded, "y1", "v"), confounded)
    a, v, y = confounded.action, confounded.column("v"), confounded.column("y1")
    w1, w0 = saturated_ipw_weights(a, confounded.column("l"))
    w = w1 + w0
    x = np.column_stack([np.ones_like(a), a, v, a * v])
    oracle = np.linalg.solve(x.T @ (x * w[:, np.newaxis]), x.T @ (w * y))
    np.testing.assert_allclose(fit.interest[0], oracle, atol=1e-8)


def test_emm_binary_ipw_constant_confounder_equals_unweighted(regression_data):
    data = make_dataset(
        {
            "a": regression_data.action,
            "v": regression_data.column("v"),
            "y": regression_data.column("y"),
            "c": np.full(10, 2.0),
        },
        action="a",
        outcomes=["y"],
        modifiers=["v"],
        confounders=["c"],
    )
    ipw = solve(build_emm_binary_ipw_model(data, "y", "v"), data)
    plain = solve(build_emm_binary_model(data, "y", "v"), data)
    np.testing.assert_allclose(ipw.interest[0], plain.interest[0], atol=1e-8)


def test_stratum_effects(regression_data):
    fit = solve(build_emm_binary_model(regression_data, "y", "v"), regression_data)
    effect, cov = linear_contrast(fit, ("beta1", "beta3"), [[1.0, 0.0], [1.0, 1.0]])
    beta = fit.theta_hat
    np.testing.assert_allclose(effect, [beta[1], beta[1] + beta[3]], atol=1e-12)
    v = fit.covariance
    assert cov[1, 1] == pytest.approx(v[1, 1] + v[3, 3] + 2 * v[1, 3], rel=1e-10)


# continuous modification


def test_emm_continuous_linear_spline_matches_ols(regression_data):
    spec = SplineSpec(kind=SplineKind.LINEAR)
    fit = solve(build_emm_continuous_model(regression_data, "y", "x", spec=spec), regression_data)
    a, xv, y = regression_data.action, regression_data.column("x"), regression_data.column("y")
    x = np.column_stack([np.ones_like(a), a, xv, a * xv])
    oracle = np.linalg.solve(x.T @ x, x.T @ y)
    np.testing.assert_allclose(fit.theta_hat, oracle, rtol=1e-8, atol=1e-8)


def test_emm_continuous_zero_outcome(actg_frame):
    frame = actg_frame.assign(cd420=0.0)
    data = Dataset.from_frame(frame, ColumnSettings(action="treat", outcomes=["cd420"], modifiers=["cd40"]))
    fit = solve(build_emm_continuous_model(data, "cd420", "cd40"), data)
    assert np.all(fit.theta_hat == 0.0)
    assert len(fit.theta_hat) == 2 + 2 * 3


def make_spline_fit(theta, cov=None):
    spec = SplineSpec(knots=(0.0, 1.0, 2.0, 3.0))
    layout = spline_layout("x", (0.0, 3.0), spec)
    theta = np.asarray(theta, dtype=float)
    cov = np.eye(len(theta)) if cov is None else cov
    fit = FitResult(
        theta_hat=theta,
        covariance=cov,
        n=100,
        root_norm=0.0,
        iterations=1,
        names=layout.names,
        interest_indices=layout.indices,
    )
    return fit, layout


def test_cace_constant_when_interaction_terms_vanish():
    cov = np.zeros((8, 8))
    cov[1, 1] = 4.0
    fit, layout = make_spline_fit([1.0, 2.5, 0.3, -0.2, 0.1, 0.0, 0.0, 0.0], cov)
    pred = predict_cace(fit, layout, np.linspace(0, 3, 7))
    np.testing.assert_allclose(pred.estimate, 2.5)
    np.testing.assert_allclose(pred.covariance, 4.0)


def test_cace_covariance_is_delta_method():
    rng = np.random.default_rng(2)
    root = rng.normal(size=(8, 8))
    cov = root @ root.T
    fit, layout = make_spline_fit(rng.normal(size=8), cov)
    grid = np.array([0.0, 0.5, 1.2, 2.2, 3.0])
    pred = predict_cace(fit, layout, grid)
    for i in range(5):
        for j in range(5):
            ci = layout.contrast(grid[i : i + 1])[0]
            cj = layout.contrast(grid[j : j + 1])[0]
            assert pred.covariance[i, j] == pytest.approx(ci @ cov @ cj, rel=1e-10, abs=1e-12)


def test_cace_is_linear_in_coefficients():
    theta = np.array([1.0, 2.0, 0.5, 0.3, -0.1, 0.7, -0.4, 0.2])
    doubled = theta.copy()
    doubled[[1, 5, 6, 7]] *= 2.0
    grid = np.linspace(0, 3, 11)
    base = predict_cace(*make_spline_fit(theta), grid)
    other = predict_cace(*make_spline_fit(doubled), grid)
    np.testing.assert_array_equal(other.estimate, 2.0 * base.estimate)


def test_grid_outside_range_raises():
    fit, layout = make_spline_fit(np.zeros(8))
    with pytest.raises(GridOutOfRange):
        predict_cace(fit, layout, [-1.0, 1.0])


def test_make_grid_spans_observed_range():
    grid = make_grid([3.0, 1.0, 7.0], 50)
    assert grid.size == 50
    assert grid[0] == 1.0 and grid[-1] == 7.0
    with pytest.raises(InvalidArgument):
        make_grid([1.0, 2.0], 0)
