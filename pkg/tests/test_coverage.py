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
"""Tests for the repeated-sampling coverage study."""
import numpy as np
import pytest

from simulband.coverage import METHODS, SimScenario, mean_model, run_coverage, run_replicate, summarize
from simulband.errors import InvalidArgument
from simulband.regions import mvn_factor

TOL = 0.02


def test_mean_model_recovers_sample_mean():
    from simulband.mest import solve

    data = np.array([[1.0, 4.0], [2.0, 5.0], [3.0, 9.0]])
    fit = solve(mean_model(2), data)
    np.testing.assert_allclose(fit.theta_hat, [2.0, 6.0], atol=1e-9)


def test_scenario_defaults_and_covariance():
    scenario = SimScenario(k=3, rho=0.5, variances=[1.0, 4.0, 9.0], seed=1)
    assert scenario.true_theta == (0.0, 0.0, 0.0)
    cov = scenario.covariance
    np.testing.assert_allclose(np.diag(cov), [1.0, 4.0, 9.0])
    assert cov[0, 1] == pytest.approx(1.0)
    assert cov[1, 2] == pytest.approx(3.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k": 0},
        {"reps": 0},
        {"n_per_rep": 1},
        {"rho": 1.5},
        {"alpha": 1.0},
        {"m": 10},
        {"k": 2, "variances": [1.0]},
        {"k": 2, "variances": [1.0, 0.0]},
        {"k": 2, "true_theta": [0.0, 0.0, 0.0]},
    ],
)
def test_invalid_scenarios(kwargs):
    with pytest.raises(InvalidArgument):
        SimScenario(**kwargs)


def test_replicate_seeds_depend_only_on_index():
    scenario = SimScenario(seed=42)
    data_a, supt_a = scenario.replicate_seeds(7)
    data_b, supt_b = scenario.replicate_seeds(7)
    assert supt_a == supt_b
    np.testing.assert_array_equal(data_a.generate_state(4), data_b.generate_state(4))
    assert scenario.replicate_seeds(8)[1] != supt_a


def test_single_replicate_reports_every_method():
    scenario = SimScenario(k=2, reps=1, n_per_rep=50, m=1000, seed=3)
    outcome = run_replicate(scenario, 0, mvn_factor(scenario.covariance), mean_model(2))
    assert outcome.error is None
    assert set(outcome.covered) == set(METHODS)
    assert outcome.critical_values["pointwise"] <= outcome.critical_values["bonferroni"]


def test_independent_coverage():
    scenario = SimScenario(k=2, rho=0.0, n_per_rep=500, reps=2000, seed=2024)
    report = run_coverage(scenario, parallel=4)
    assert report.n_completed == 2000
    assert report.n_failed == 0
    assert report.simultaneous["supt"] == pytest.approx(0.95, abs=TOL)
    assert report.simultaneous["bonferroni"] == pytest.approx(0.9506, abs=TOL)
    assert report.simultaneous["pointwise"] == pytest.approx(0.9025, abs=TOL)
    assert report.simultaneous["ellipsoid"] == pytest.approx(0.95, abs=TOL)
    assert report.simultaneous["pointwise"] < report.simultaneous["supt"]
    for values in report.marginal["pointwise"], report.marginal["supt"]:
        assert len(values) == 2
    assert report.mean_critical_values["supt"] == pytest.approx(2.236, abs=0.02)


def test_perfectly_correlated_coverage():
    scenario = SimScenario(k=2, rho=1.0, n_per_rep=500, reps=1000, seed=5)
    report = run_coverage(scenario, parallel=2)
    assert report.n_failed == 0
    assert report.mean_critical_values["supt"] == pytest.approx(1.96, abs=0.01)
    for method in ("pointwise", "supt", "ellipsoid"):
        assert report.simultaneous[method] == pytest.approx(0.95, abs=0.025)
    assert report.simultaneous["bonferroni"] > report.simultaneous["supt"]


def test_coverage_independent_of_thread_count():
    scenario = SimScenario(k=3, rho=0.3, n_per_rep=40, reps=30, m=2000, seed=11)
    serial = run_coverage(scenario, parallel=1)
    threaded = run_coverage(scenario, parallel=4)
    assert serial.to_dict() == threaded.to_dict()


def test_summarize_rejects_all_failures():
    from simulband.coverage import ReplicateOutcome

    scenario = SimScenario(reps=2, seed=0)
    with pytest.raises(InvalidArgument):
        summarize(scenario, [ReplicateOutcome(error="NonConvergence"), ReplicateOutcome(error="NonConvergence")])


def test_summarize_counts_failures():
    from simulband.coverage import ReplicateOutcome

    scenario = SimScenario(k=1, reps=2, seed=0)
    good = ReplicateOutcome(
        covered={method: True for method in METHODS},
        marginal={"pointwise": np.array([True]), "bonferroni": np.array([True]), "supt": np.array([True])},
        critical_values={"pointwise": 1.96, "bonferroni": 1.96, "supt": 1.96},
    )
    report = summarize(scenario, [good, ReplicateOutcome(error="SingularJacobian")])
    assert report.n_completed == 1
    assert report.failures == {"SingularJacobian": 1}
    assert report.simultaneous["supt"] == 1.0


@pytest.mark.slow
@pytest.mark.parametrize("rho", [0.0, 0.5, 0.9, 1.0])
def test_full_coverage_study(rho):
    report = run_coverage(SimScenario(k=2, rho=rho, n_per_rep=500, reps=10000, seed=1))
    for method in ("supt", "ellipsoid"):
        assert report.simultaneous[method] == pytest.approx(0.95, abs=0.01)
    assert report.simultaneous["bonferroni"] >= 0.945
    if rho == 0.0:
        assert report.simultaneous["pointwise"] == pytest.approx(0.9025, abs=0.01)
    if rho == 1.0:
        assert report.simultaneous["pointwise"] == pytest.approx(0.95, abs=0.01)
    else:
        assert report.simultaneous["pointwise"] < report.simultaneous["supt"]
