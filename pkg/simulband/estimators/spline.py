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
"""Restricted cubic spline bases."""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from simulband.errors import InvalidKnots
from simulband.types import SplineKind

# knot percentiles by knot count
DEFAULT_KNOT_PERCENTILES = {
    3: (10.0, 50.0, 90.0),
    4: (5.0, 35.0, 65.0, 95.0),
    5: (5.0, 27.5, 50.0, 72.5, 95.0),
    6: (5.0, 23.0, 41.0, 59.0, 77.0, 95.0),
    7: (2.5, 18.3333, 34.1667, 50.0, 65.8333, 81.6667, 97.5),
}


@dataclass(frozen=True)
class SplineSpec:
    kind: SplineKind = SplineKind.RESTRICTED_CUBIC
    knots: Tuple[float, ...] = ()
    # divide nonlinear terms by (t_k - t_1)^2 so they stay on the scale of x
    normalize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", SplineKind(self.kind))
        knots = tuple(float(t) for t in self.knots)
        object.__setattr__(self, "knots", knots)
        if self.kind == SplineKind.LINEAR:
            return
        if len(knots) < 3:
            raise InvalidKnots(f"A restricted cubic spline needs at least 3 knots, got {len(knots)}")
        if not np.all(np.isfinite(knots)):
            raise InvalidKnots("Knots must be finite")
        if np.any(np.diff(knots) <= 0.0):
            raise InvalidKnots(f"Knots must be strictly increasing: {knots}")

    @property
    def n_knots(self) -> int:
        return len(self.knots)

    @property
    def n_columns(self) -> int:
        if self.kind == SplineKind.LINEAR:
            return 1
        return self.n_knots - 1

    @classmethod
    def from_data(cls, x, n_knots: int = 4, knots: Optional[Sequence[float]] = None, normalize: bool = True):
        if knots is None:
            knots = default_knots(x, n_knots=n_knots)
        return cls(kind=SplineKind.RESTRICTED_CUBIC, knots=tuple(knots), normalize=normalize)


def default_knots(x, n_knots: int = 4) -> np.ndarray:
    if n_knots not in DEFAULT_KNOT_PERCENTILES:
        raise InvalidKnots(f"No default placement for {n_knots} knots (supported: 3-7)")
    knots = np.percentile(np.asarray(x, dtype=float), DEFAULT_KNOT_PERCENTILES[n_knots])
    if np.any(np.diff(knots) <= 0.0):
        raise InvalidKnots(f"Default knots are not distinct (too many ties?): {knots}")
    return knots


def spline_design(x, spec: SplineSpec) -> np.ndarray:
    """Restricted cubic spline basis of ``x``.

    Column 0 is ``x`` itself. Column ``j`` (``1 <= j <= k-2``) is

        (x - t_j)_+^3
        - (x - t_{k-1})_+^3 (t_k - t_j) / (t_k - t_{k-1})
        + (x - t_k)_+^3 (t_{k-1} - t_j) / (t_k - t_{k-1})

    which is zero left of ``t_j`` and linear right of ``t_k``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    if not np.all(np.isfinite(x)):
        raise InvalidKnots("Spline input must be finite")
    if spec.kind == SplineKind.LINEAR:
        return x[:, np.newaxis].copy()
    t = np.asarray(spec.knots)
    k = len(t)
    t_last, t_prev = t[-1], t[-2]
    norm = (t_last - t[0]) ** 2 if spec.normalize else 1.0
    tail_prev = np.clip(x - t_prev, 0.0, None) ** 3
    tail_last = np.clip(x - t_last, 0.0, None) ** 3
    columns = [x]
    for j in range(k - 2):
        term = (
            np.clip(x - t[j], 0.0, None) ** 3
            - tail_prev * (t_last - t[j]) / (t_last - t_prev)
            + tail_last * (t_prev - t[j]) / (t_last - t_prev)
        )
        columns.append(term / norm)
    return np.column_stack(columns)


def spline_names(spec: SplineSpec, prefix: str = "s") -> Tuple[str, ...]:
    return tuple(f"{prefix}{j}" for j in range(1, spec.n_columns + 1))
