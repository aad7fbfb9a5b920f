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
"""Marginal structural models for effect measure modification."""
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from simulband.estimators.data import Dataset, DesignCache
from simulband.estimators.propensity import PropensityModel
from simulband.estimators.spline import SplineSpec, spline_design, spline_names
from simulband.mest import EstimatingModel


@dataclass(frozen=True)
class MsmLayout:
    """Coefficient labels and the design builder of a marginal structural model.

    ``design_builder(action, modifier)`` maps observation columns to design rows whose first entry is the
    intercept. ``offset`` locates the first coefficient inside the stacked parameter vector (after any propensity
    score parameters).
    """

    names: Tuple[str, ...]
    design_builder: Callable[[np.ndarray, np.ndarray], np.ndarray]
    modifier: str
    modifier_range: Tuple[float, float]
    offset: int = 0
    spline: Optional[SplineSpec] = None

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(range(self.offset, self.offset + self.dim))

    def design(self, action, modifier) -> np.ndarray:
        design = self.design_builder(np.asarray(action, dtype=float), np.asarray(modifier, dtype=float))
        assert design.shape[1] == self.dim, "Design width does not match the coefficient layout"
        return design

    def contrast(self, grid) -> np.ndarray:
        """Design of the action contrast ``E[Y(1) | x] - E[Y(0) | x]`` at each grid value."""
        grid = np.asarray(grid, dtype=float)
        return self.design(np.ones_like(grid), grid) - self.design(np.zeros_like(grid), grid)


def binary_layout(modifier: str, modifier_range: Tuple[float, float], offset: int = 0) -> MsmLayout:
    """``(1, A, V, AV)``."""

    def builder(a, v):
        return np.column_stack([np.ones_like(a), a, v, a * v])

    return MsmLayout(
        names=("beta0", "beta1", "beta2", "beta3"),
        design_builder=builder,
        modifier=modifier,
        modifier_range=modifier_range,
        offset=offset,
    )


def spline_layout(modifier: str, modifier_range: Tuple[float, float], spec: SplineSpec, offset: int = 0) -> MsmLayout:
    """``(1, A, s(X), s(X) A)``."""

    def builder(a, x):
        basis = spline_design(x, spec)
        return np.column_stack([np.ones_like(a), a, basis, basis * a[:, np.newaxis]])

    names = (
        ("gamma0", "gamma1")
        + tuple(f"gamma_{name}" for name in spline_names(spec))
        + tuple(f"gamma_a{name}" for name in spline_names(spec))
    )
    return MsmLayout(
        names=names,
        design_builder=builder,
        modifier=modifier,
        modifier_range=modifier_range,
        offset=offset,
        spline=spec,
    )


def _propensity_from(data: Dataset, confounders, categorical, bins) -> PropensityModel:
    mapping = data.mapping
    return PropensityModel(
        data,
        confounders,
        categorical=mapping.categorical if categorical is None else categorical,
        bins=mapping.bins if bins is None else bins,
    )


def _msm_model(
    data: Dataset,
    outcome: str,
    modifier: str,
    layout_factory: Callable[[int], MsmLayout],
    ps_model: Optional[PropensityModel] = None,
) -> EstimatingModel:
    data.column(outcome)
    data.column(modifier)
    p = 0 if ps_model is None else ps_model.dim
    layout = layout_factory(p)
    design = DesignCache(lambda d: layout.design(d.action, d.column(modifier)))

    def g(d: Dataset, theta: np.ndarray) -> np.ndarray:
        x = design(d)
        beta = theta[p:]
        residual = d.column(outcome) - x @ beta
        if ps_model is None:
            return residual[:, np.newaxis] * x
        eta = theta[:p]
        w1, w0 = ps_model.weights(d, eta)
        weighted = ((w1 + w0) * residual)[:, np.newaxis] * x
        return np.hstack([ps_model.score(d, eta), weighted])

    names = layout.names
    initial = np.zeros(layout.dim)
    diagnose = None
    if ps_model is not None:
        names = ps_model.names + names
        initial = np.concatenate([ps_model.initial(), initial])

        def diagnose(d: Dataset, theta: np.ndarray):
            return ps_model.diagnose(d, theta[:p])

    return EstimatingModel(
        dim_theta=p + layout.dim,
        g=g,
        interest_indices=layout.indices,
        initial_theta=initial,
        names=names,
        layout=layout,
        diagnose=diagnose,
    )


def _range(data: Dataset, modifier: str) -> Tuple[float, float]:
    values = data.column(modifier)
    return float(values.min()), float(values.max())


def build_emm_binary_model(data: Dataset, outcome: str, modifier: str) -> EstimatingModel:
    """Least squares for ``E[Y | A, V] = beta0 + beta1 A + beta2 V + beta3 A V``."""
    return _msm_model(data, outcome, modifier, lambda off: binary_layout(modifier, _range(data, modifier), off))


def build_emm_binary_ipw_model(
    data: Dataset,
    outcome: str,
    modifier: str,
    confounders: Optional[Sequence[str]] = None,
    categorical: Optional[Sequence[str]] = None,
    bins: Optional[Dict[str, Sequence[float]]] = None,
) -> EstimatingModel:
    """Propensity score model stacked on the weighted least squares score of the binary modifier model."""
    ps_model = _propensity_from(
        data, data.mapping.confounders if confounders is None else confounders, categorical, bins
    )
    return _msm_model(
        data, outcome, modifier, lambda off: binary_layout(modifier, _range(data, modifier), off), ps_model=ps_model
    )


def build_emm_continuous_model(
    data: Dataset,
    outcome: str,
    modifier: str,
    spec: Optional[SplineSpec] = None,
    weighted_by: Optional[Sequence[str]] = None,
    categorical: Optional[Sequence[str]] = None,
    bins: Optional[Dict[str, Sequence[float]]] = None,
) -> EstimatingModel:
    """(Weighted) least squares over the action-by-spline interaction design.

    Without ``spec`` the spline uses four knots at the 5/35/65/95 percentiles of the modifier. Passing
    confounders in ``weighted_by`` stacks a propensity score model and weights the score.
    """
    if spec is None:
        spec = SplineSpec.from_data(data.column(modifier))
    ps_model = None
    if weighted_by is not None:
        ps_model = _propensity_from(data, weighted_by, categorical, bins)
    return _msm_model(
        data,
        outcome,
        modifier,
        lambda off: spline_layout(modifier, _range(data, modifier), spec, off),
        ps_model=ps_model,
    )
