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
"""Observational datasets and covariate design matrices."""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from simulband.errors import EmptyAfterFiltering, MissingColumn, NonBinaryAction, SingularJacobian
from simulband.logging import get_logger
from simulband.settings import ColumnSettings

logger = get_logger()


@dataclass(frozen=True)
class Dataset:
    """Typed numeric columns plus the column mapping they were ingested with."""

    columns: Dict[str, np.ndarray]
    mapping: ColumnSettings
    source: Optional[str] = None
    dropped: int = 0
    diagnostics: Dict[str, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.action)

    @property
    def action(self) -> np.ndarray:
        return self.columns[self.mapping.action]

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumn(name, source=self.source)
        return self.columns[name]

    def arm_sizes(self) -> Tuple[int, int]:
        treated = int(np.sum(self.action == 1.0))
        return treated, self.n - treated

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, mapping: ColumnSettings, source: Optional[str] = None):
        """Validate and type the mapped columns of ``frame``.

        Rows with a missing value in any mapped column are dropped and counted.
        """
        for col in mapping.mapped:
            if col not in frame.columns:
                raise MissingColumn(col, source=source)
        mapped = frame[mapping.mapped].apply(pd.to_numeric, errors="coerce")
        keep = mapped.notna().all(axis=1).to_numpy()
        dropped = int(np.sum(~keep))
        if dropped:
            logger.info("Dropping %d row(s) with missing values in mapped columns", dropped)
        mapped = mapped.loc[keep]
        if len(mapped) == 0:
            raise EmptyAfterFiltering(f"No rows left after dropping missing values ({source or 'data'})")
        action = mapped[mapping.action].to_numpy(dtype=float)
        bad = ~np.isin(action, (0.0, 1.0))
        if np.any(bad):
            values = sorted(set(action[bad].tolist()))[:5]
            raise NonBinaryAction(f"Action column '{mapping.action}' must be 0/1, found {values}")
        columns = {col: mapped[col].to_numpy(dtype=float) for col in mapping.mapped}
        return cls(
            columns=columns,
            mapping=mapping,
            source=source,
            dropped=dropped,
            diagnostics={"rows_read": int(len(frame)), "rows_dropped": dropped, "n": int(len(mapped))},
        )

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, Sequence[float]], mapping: ColumnSettings):
        return cls.from_frame(pd.DataFrame({key: np.asarray(value) for key, value in arrays.items()}), mapping)


def build_confounder_design(
    data: Dataset,
    confounders: Sequence[str],
    categorical: Sequence[str] = (),
    bins: Optional[Mapping[str, Sequence[float]]] = None,
) -> Tuple[np.ndarray, List[str]]:
    """Propensity-model design: intercept, linear terms and reference-dropped indicators.

    Columns listed in ``bins`` are cut at the given points (``np.digitize``, left-closed) and then treated as
    categorical. Constant columns are dropped since the intercept absorbs them.
    """
    bins = bins or {}
    parts = [np.ones(data.n)]
    names = ["intercept"]
    for col in confounders:
        values = data.column(col)
        if col in bins:
            values = np.digitize(values, np.asarray(bins[col], dtype=float)).astype(float)
        if col in categorical or col in bins:
            levels = np.unique(values)
            if len(levels) < 2:
                logger.warning("Dropping constant confounder '%s'", col)
                continue
            for level in levels[1:]:
                parts.append((values == level).astype(float))
                names.append(f"{col}[{level:g}]")
        else:
            if np.ptp(values) == 0.0:
                logger.warning("Dropping constant confounder '%s'", col)
                continue
            parts.append(values)
            names.append(col)
    design = np.column_stack(parts)
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        raise SingularJacobian(f"Confounder design is rank-deficient (rank {rank} < {design.shape[1]} columns)")
    return design, names


class DesignCache:
    """Memoizes a data -> design-arrays builder for the most recent dataset."""

    def __init__(self, builder):
        self.builder = builder
        self._entry = None

    def __call__(self, data: Dataset):
        entry = self._entry
        if entry is not None and entry[0] is data:
            return entry[1]
        value = self.builder(data)
        self._entry = (data, value)
        return value
