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
"""Predictions of conditional average causal effects and other linear functionals of a fit."""
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from simulband.errors import GridOutOfRange, InvalidArgument
from simulband.estimators.msm import MsmLayout
from simulband.mest import FitResult

GRID_PRESETS = (50, 1000)


@dataclass(frozen=True)
class GridPrediction:
    grid: np.ndarray
    estimate: np.ndarray
    covariance: np.ndarray
    # BandKind -> IntervalSet, filled in by regions.band_for_grid
    bands: Dict[Any, Any] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.grid)

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


def make_grid(x, size: int) -> np.ndarray:
    """``size`` evenly spaced values spanning the observed range of ``x``."""
    if size < 1:
        raise InvalidArgument(f"Grid size must be positive, got {size}")
    x = np.asarray(x, dtype=float)
    return np.linspace(x.min(), x.max(), size)


def predict_cace(fit: FitResult, layout: MsmLayout, grid) -> GridPrediction:
    """Conditional average causal effect ``gamma1 + s(x) gamma_as`` and its covariance over ``grid``.

    The grid covariance is ``X_c V X_c^T`` with ``X_c`` the contrast design and ``V`` the covariance block of the
    model coefficients.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    low, high = layout.modifier_range
    slack = 1e-9 * max(1.0, abs(low), abs(high))
    if np.any(grid < low - slack) or np.any(grid > high + slack):
        raise GridOutOfRange(f"Grid must lie within the observed modifier range [{low:g}, {high:g}]")
    coef, cov = fit.block(layout.indices)
    contrast = layout.contrast(grid)
    estimate = contrast @ coef
    grid_cov = contrast @ cov @ contrast.T
    grid_cov = (grid_cov + grid_cov.T) / 2.0
    return GridPrediction(grid=grid, estimate=estimate, covariance=grid_cov)


def linear_contrast(fit: FitResult, names: Sequence[str], weights) -> Tuple[np.ndarray, np.ndarray]:
    """``L theta`` and ``L V L^T`` for contrast rows ``weights`` over the named parameters."""
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    if weights.shape[1] != len(names):
        raise InvalidArgument(f"Contrast rows need {len(names)} weights, got {weights.shape[1]}")
    coef, cov = fit.block([fit.index_of(name) for name in names])
    return weights @ coef, weights @ cov @ weights.T
