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
"""SVG figures for confidence regions.

Both figures use a fixed 800x600 canvas. The affine map from data coordinates to pixels is written into each file as
a comment so figures from different runs can be compared directly.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from mako.lookup import TemplateLookup

from simulband.estimators.predict import GridPrediction
from simulband.logging import get_logger
from simulband.regions import Ellipsoid, IntervalSet
from simulband.types import BandKind

from .templates import template_dir

logger = get_logger()

WIDTH = 800
HEIGHT = 600
# left, right, top, bottom
MARGINS = (90, 30, 50, 70)
PAD = 0.05
N_TICKS = 5


def _fmt(value) -> str:
    return f"{value:.2f}"


def _lookup() -> TemplateLookup:
    return TemplateLookup(directories=[str(template_dir)])


BAND_STYLES = {
    BandKind.POINTWISE: {"fill": "#999999", "opacity": 0.5},
    BandKind.BONFERRONI: {"fill": "#d62728", "opacity": 0.35},
    BandKind.SUPT: {"fill": "#1f77b4", "opacity": 0.35},
}


@dataclass(frozen=True)
class AffineMap:
    """``px = x_scale * x + x_offset``, ``py = y_scale * y + y_offset`` (``y_scale`` is negative)."""

    x_scale: float
    x_offset: float
    y_scale: float
    y_offset: float
    bounds: Tuple[float, float, float, float]

    @classmethod
    def from_bounds(cls, xmin: float, xmax: float, ymin: float, ymax: float, pad: float = PAD):
        def padded(low, high):
            span = high - low
            if span <= 0.0:
                span = max(1.0, abs(low))
            return low - pad * span, high + pad * span

        xmin, xmax = padded(xmin, xmax)
        ymin, ymax = padded(ymin, ymax)
        left, right, top, bottom = MARGINS
        x_scale = (WIDTH - left - right) / (xmax - xmin)
        y_scale = -(HEIGHT - top - bottom) / (ymax - ymin)
        return cls(
            x_scale=x_scale,
            x_offset=left - x_scale * xmin,
            y_scale=y_scale,
            y_offset=top - y_scale * ymax,
            bounds=(xmin, xmax, ymin, ymax),
        )

    def px(self, x) -> np.ndarray:
        return self.x_scale * np.asarray(x, dtype=float) + self.x_offset

    def py(self, y) -> np.ndarray:
        return self.y_scale * np.asarray(y, dtype=float) + self.y_offset

    def describe(self) -> str:
        return (
            f"px = {self.x_scale:.17g} * x + {self.x_offset:.17g}; "
            f"py = {self.y_scale:.17g} * y + {self.y_offset:.17g}"
        )

    def ticks(self) -> Tuple[List[Tuple[float, str]], List[Tuple[float, str]]]:
        xmin, xmax, ymin, ymax = self.bounds
        xticks = [(float(self.px(v)), f"{v:.4g}") for v in np.linspace(xmin, xmax, N_TICKS)]
        yticks = [(float(self.py(v)), f"{v:.4g}") for v in np.linspace(ymin, ymax, N_TICKS)]
        return xticks, yticks


def _points(amap: AffineMap, xs, ys) -> str:
    return " ".join(f"{px:.2f},{py:.2f}" for px, py in zip(amap.px(xs), amap.py(ys)))


def _rect(amap: AffineMap, intervals: IntervalSet) -> Dict[str, float]:
    x0, x1 = amap.px([intervals.lower[0], intervals.upper[0]])
    y0, y1 = amap.py([intervals.upper[1], intervals.lower[1]])
    return {"x": float(x0), "y": float(y0), "width": float(x1 - x0), "height": float(y1 - y0)}


def render_effects_figure(
    bands: Dict[BandKind, IntervalSet],
    region: Optional[Ellipsoid],
    names: Sequence[str],
    title: str = "Confidence regions",
) -> str:
    """Point estimate, interval crosshairs, dashed pointwise rectangle, sup-t rectangle and the ellipse."""
    pointwise = bands[BandKind.POINTWISE]
    assert pointwise.k == 2, "The effects figure needs exactly two parameters"
    lows = [b.lower for b in bands.values()]
    highs = [b.upper for b in bands.values()]
    if region is not None and region.boundary is not None:
        lows.append(region.boundary.min(axis=0))
        highs.append(region.boundary.max(axis=0))
    low = np.min(lows, axis=0)
    high = np.max(highs, axis=0)
    amap = AffineMap.from_bounds(low[0], high[0], low[1], high[1])
    est = pointwise.estimate
    cx, cy = float(amap.px(est[0])), float(amap.py(est[1]))
    crosshairs = [
        (float(amap.px(pointwise.lower[0])), cy, float(amap.px(pointwise.upper[0])), cy),
        (cx, float(amap.py(pointwise.lower[1])), cx, float(amap.py(pointwise.upper[1]))),
    ]
    ellipse = None
    if region is not None and region.boundary is not None:
        ellipse = _points(amap, region.boundary[:, 0], region.boundary[:, 1])
    xticks, yticks = amap.ticks()
    template = _lookup().get_template("effects_figure.mako")
    return template.render(
        f=_fmt,
        width=WIDTH,
        height=HEIGHT,
        margins=MARGINS,
        title=title,
        xlabel=names[0],
        ylabel=names[1],
        transform=amap.describe(),
        xticks=xticks,
        yticks=yticks,
        center=(cx, cy),
        crosshairs=crosshairs,
        pointwise_rect=_rect(amap, pointwise),
        supt_rect=_rect(amap, bands[BandKind.SUPT]),
        ellipse=ellipse,
    )


def render_grid_figure(
    pred: GridPrediction, xlabel: str = "x", ylabel: str = "Effect", title: str = "Confidence bands"
) -> str:
    """Estimate line over the grid with nested shaded bands (widest drawn first)."""
    assert len(pred.bands) > 0, "No bands attached to the grid prediction"
    low = min(float(np.min(b.lower)) for b in pred.bands.values())
    high = max(float(np.max(b.upper)) for b in pred.bands.values())
    amap = AffineMap.from_bounds(float(pred.grid.min()), float(pred.grid.max()), low, high)
    order = sorted(pred.bands, key=lambda kind: -pred.bands[kind].critical_value)
    bands = []
    for kind in order:
        intervals = pred.bands[kind]
        xs = np.concatenate([pred.grid, pred.grid[::-1]])
        ys = np.concatenate([intervals.upper, intervals.lower[::-1]])
        bands.append({"kind": kind.value, "label": kind.label, "points": _points(amap, xs, ys), **BAND_STYLES[kind]})
    xticks, yticks = amap.ticks()
    zero = None
    if low < 0.0 < high:
        zero = float(amap.py(0.0))
    template = _lookup().get_template("grid_figure.mako")
    return template.render(
        f=_fmt,
        width=WIDTH,
        height=HEIGHT,
        margins=MARGINS,
        title=title,
        xlabel=xlabel,
        ylabel=ylabel,
        transform=amap.describe(),
        xticks=xticks,
        yticks=yticks,
        bands=bands,
        line=_points(amap, pred.grid, pred.estimate),
        zero=zero,
    )


def write_figure(path: Union[str, Path], content: str) -> Path:
    path = Path(path)
    logger.debug("Writing %s", path)
    path.write_text(content, encoding="utf-8")
    return path
