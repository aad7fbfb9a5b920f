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
"""Estimating functions for average causal effects on multiple outcomes."""
from typing import Dict, Optional, Sequence

import numpy as np

from simulband.errors import EmptyArm, InvalidArgument
from simulband.estimators.data import Dataset
from simulband.estimators.propensity import PropensityModel
from simulband.mest import EstimatingModel

EFFECT_NAMES = ("mu1", "mu0", "omega1", "omega0", "psi1", "psi2")


def _resolve_outcomes(data: Dataset, outcomes: Optional[Sequence[str]]):
    if outcomes is None:
        outcomes = data.mapping.outcomes[:2]
    outcomes = list(outcomes)
    if len(outcomes) != 2:
        raise InvalidArgument(f"Exactly two outcome columns are required, got {outcomes}")
    for col in outcomes:
        data.column(col)
    return outcomes


def _check_arms(data: Dataset):
    treated, untreated = data.arm_sizes()
    if treated == 0 or untreated == 0:
        raise EmptyArm(f"Both action arms need observations (A=1: {treated}, A=0: {untreated})")


def _arm_means(data: Dataset, outcomes: Sequence[str]) -> np.ndarray:
    a = data.action
    theta = []
    for col in outcomes:
        y = data.column(col)
        theta.extend([y[a == 1].mean(), y[a == 0].mean()])
    mu1, mu0, omega1, omega0 = theta
    return np.array([mu1, mu0, omega1, omega0, mu1 - mu0, omega1 - omega0])


def _effect_components(a, y1, y2, w1, w0, theta) -> np.ndarray:
    mu1, mu0, omega1, omega0, psi1, psi2 = theta
    ones = np.ones_like(y1)
    return np.column_stack(
        [
            a * w1 * (y1 - mu1),
            (1 - a) * w0 * (y1 - mu0),
            a * w1 * (y2 - omega1),
            (1 - a) * w0 * (y2 - omega0),
            ones * ((mu1 - mu0) - psi1),
            ones * ((omega1 - omega0) - psi2),
        ]
    )


def build_effects_model(data: Dataset, outcomes: Optional[Sequence[str]] = None) -> EstimatingModel:
    """Difference in arm means for two outcomes, stacked.

    ``theta = (mu1, mu0, omega1, omega0, psi1, psi2)``; the contrasts ``psi`` are the parameters of interest.
    """
    outcomes = _resolve_outcomes(data, outcomes)
    _check_arms(data)
    col1, col2 = outcomes

    def g(d: Dataset, theta: np.ndarray) -> np.ndarray:
        ones = np.ones(d.n)
        return _effect_components(d.action, d.column(col1), d.column(col2), ones, ones, theta)

    return EstimatingModel(
        dim_theta=6,
        g=g,
        interest_indices=(4, 5),
        initial_theta=_arm_means(data, outcomes),
        names=EFFECT_NAMES,
    )


def build_ipw_effects_model(
    data: Dataset,
    outcomes: Optional[Sequence[str]] = None,
    confounders: Optional[Sequence[str]] = None,
    categorical: Optional[Sequence[str]] = None,
    bins: Optional[Dict[str, Sequence[float]]] = None,
) -> EstimatingModel:
    """Inverse probability weighted (Hajek) version of :func:`build_effects_model`.

    ``theta = (eta, mu1, mu0, omega1, omega0, psi1, psi2)`` where ``eta`` parametrizes the logistic propensity
    score model. ``eta`` is a nuisance block: its uncertainty enters the sandwich covariance, but only ``psi`` is
    of interest.
    """
    outcomes = _resolve_outcomes(data, outcomes)
    _check_arms(data)
    col1, col2 = outcomes
    mapping = data.mapping
    ps_model = PropensityModel(
        data,
        mapping.confounders if confounders is None else confounders,
        categorical=mapping.categorical if categorical is None else categorical,
        bins=mapping.bins if bins is None else bins,
    )
    p = ps_model.dim

    def g(d: Dataset, theta: np.ndarray) -> np.ndarray:
        eta = theta[:p]
        w1, w0 = ps_model.weights(d, eta)
        effects = _effect_components(d.action, d.column(col1), d.column(col2), w1, w0, theta[p:])
        return np.hstack([ps_model.score(d, eta), effects])

    def diagnose(d: Dataset, theta: np.ndarray):
        return ps_model.diagnose(d, theta[:p])

    return EstimatingModel(
        dim_theta=p + 6,
        g=g,
        interest_indices=(p + 4, p + 5),
        initial_theta=np.concatenate([ps_model.initial(), _arm_means(data, outcomes)]),
        names=ps_model.names + EFFECT_NAMES,
        layout=ps_model,
        diagnose=diagnose,
    )
