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
"""Logistic propensity score model shared by the inverse probability weighted estimators."""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from simulband.estimators.data import Dataset, DesignCache, build_confounder_design
from simulband.logging import get_logger

logger = get_logger()

PROPENSITY_BOUND = 1e-12


class PropensityModel:
    """Logistic regression ``Pr(A=1 | W) = expit(W eta)`` as the leading block of a stacked model."""

    def __init__(
        self,
        data: Dataset,
        confounders: Sequence[str],
        categorical: Sequence[str] = (),
        bins: Optional[Dict[str, Sequence[float]]] = None,
    ):
        self.confounders = list(confounders)
        self.categorical = list(categorical)
        self.bins = dict(bins or {})
        _, design_names = self._build(data)
        self.design_names: List[str] = design_names
        self.design = DesignCache(lambda d: self._build(d)[0])

    def _build(self, data: Dataset):
        return build_confounder_design(data, self.confounders, categorical=self.categorical, bins=self.bins)

    @property
    def dim(self) -> int:
        return len(self.design_names)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f"eta_{name}" for name in self.design_names)

    def initial(self) -> np.ndarray:
        return np.zeros(self.dim)

    def score(self, data: Dataset, eta: np.ndarray) -> np.ndarray:
        """``(A_i - expit(W_i eta)) W_i`` for every observation."""
        design = self.design(data)
        fitted = expit(design @ eta)
        return (data.action - fitted)[:, np.newaxis] * design

    def propensity(self, data: Dataset, eta: np.ndarray) -> np.ndarray:
        """Clamped propensity scores, safe to divide by."""
        return np.clip(expit(self.design(data) @ eta), PROPENSITY_BOUND, 1.0 - PROPENSITY_BOUND)

    def weights(self, data: Dataset, eta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Inverse probability weights ``A/pi`` and ``(1-A)/(1-pi)``."""
        pi = self.propensity(data, eta)
        action = data.action
        return action / pi, (1.0 - action) / (1.0 - pi)

    def diagnose(self, data: Dataset, eta: np.ndarray) -> Dict[str, float]:
        raw = expit(self.design(data) @ eta)
        clamped = int(np.sum((raw < PROPENSITY_BOUND) | (raw > 1.0 - PROPENSITY_BOUND)))
        if clamped:
            low, high = PROPENSITY_BOUND, 1.0 - PROPENSITY_BOUND
            logger.warning("Clamped %d propensity score(s) to [%g, %g]", clamped, low, high)
        return {
            "propensity_clamped": clamped,
            "propensity_min": float(raw.min()),
            "propensity_max": float(raw.max()),
        }
