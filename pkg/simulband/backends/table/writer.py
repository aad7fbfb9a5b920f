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
"""Writer for ``table.csv`` and ``grid.csv``.

``table.csv`` mirrors the usual publication layout: an estimate row, one interval row per region kind and one width
row per region kind, numbers rounded to one decimal.
"""
from pathlib import Path
from typing import Dict, Sequence, Union

import pandas as pd

from simulband.coverage import CoverageReport
from simulband.estimators.predict import GridPrediction
from simulband.logging import get_logger
from simulband.regions import IntervalSet
from simulband.types import BandKind

logger = get_logger()

ROW_ORDER = (BandKind.POINTWISE, BandKind.BONFERRONI, BandKind.SUPT)


def _fmt(value: float) -> str:
    ret = f"{value:.1f}"
    return "0.0" if ret == "-0.0" else ret


def band_table(bands: Dict[BandKind, IntervalSet], names: Sequence[str]) -> pd.DataFrame:
    estimate = bands[BandKind.POINTWISE].estimate
    rows = [["Estimate", ""] + [_fmt(value) for value in estimate]]
    for kind in ROW_ORDER:
        intervals = bands[kind]
        cells = [f"[{_fmt(lo)}, {_fmt(hi)}]" for lo, hi in zip(intervals.lower, intervals.upper)]
        rows.append(["Confidence", kind.label] + cells)
    for kind in ROW_ORDER:
        rows.append(["Region widths", kind.label] + [_fmt(width) for width in bands[kind].widths])
    return pd.DataFrame(rows, columns=["section", "region"] + list(names))


def write_table(path: Union[str, Path], bands: Dict[BandKind, IntervalSet], names: Sequence[str]) -> Path:
    path = Path(path)
    logger.debug("Writing %s", path)
    band_table(bands, names).to_csv(path, index=False, lineterminator="\n")
    return path


def grid_frame(pred: GridPrediction) -> pd.DataFrame:
    frame = pd.DataFrame({"x": pred.grid, "estimate": pred.estimate, "se": pred.standard_errors})
    for kind in ROW_ORDER:
        if kind in pred.bands:
            frame[f"{kind.value}_lower"] = pred.bands[kind].lower
            frame[f"{kind.value}_upper"] = pred.bands[kind].upper
    return frame


def write_grid(path: Union[str, Path], pred: GridPrediction) -> Path:
    """Full-precision grid predictions with one lower/upper column pair per band kind."""
    path = Path(path)
    logger.debug("Writing %s", path)
    grid_frame(pred).to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
    return path


def coverage_table(report: CoverageReport) -> pd.DataFrame:
    rows = []
    for method, value in report.simultaneous.items():
        row = {
            "method": method,
            "simultaneous": round(value, 4),
            "mean_critical_value": round(report.mean_critical_values[method], 3)
            if method in report.mean_critical_values
            else None,
        }
        for i, marginal in enumerate(report.marginal.get(method, []), start=1):
            row[f"marginal_{i}"] = round(marginal, 4)
        rows.append(row)
    return pd.DataFrame(rows)


def write_coverage_table(path: Union[str, Path], report: CoverageReport) -> Path:
    path = Path(path)
    logger.debug("Writing %s", path)
    coverage_table(report).to_csv(path, index=False, lineterminator="\n")
    return path
