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
"""Tests for the result writers."""
import json
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from simulband.backends.json.writer import dumps, read_result, regions_to_dict, write_result
from simulband.backends.svg.writer import AffineMap, render_effects_figure, render_grid_figure, write_figure
from simulband.backends.table.writer import band_table, coverage_table, grid_frame, write_grid, write_table
from simulband.coverage import CoverageReport, SimScenario
from simulband.estimators.predict import GridPrediction
from simulband.regions import band, band_for_grid, construct_bands, ellipsoid
from simulband.types import BandKind

SVG_NS = "{http://www.w3.org/2000/svg}"
THETA = np.array([51.3, 6.7])
COV = np.array([[52.8, 39.0], [39.0, 532.2]])
NAMES = ["psi1", "psi2"]


@pytest.fixture(name="bands")
def fixture_bands():
    return construct_bands(THETA, COV, 0.05, m=20000, seed=1, names=NAMES)


def test_band_table_layout(bands):
    frame = band_table(bands, NAMES)
    assert list(frame.columns) == ["section", "region", "psi1", "psi2"]
    assert list(frame["section"]) == ["Estimate"] + ["Confidence"] * 3 + ["Region widths"] * 3
    assert frame.iloc[0]["psi1"] == "51.3"
    assert frame.iloc[1]["region"] == "Intervals"
    assert frame.iloc[1]["psi1"] == "[37.1, 65.5]"
    assert frame.iloc[5]["region"] == "Band -- Bonferroni"


def test_band_table_has_no_negative_zero():
    intervals = band([-0.01, 0.0], np.diag([1e-6, 1e-6]), 1.96, BandKind.POINTWISE)
    bands = {kind: intervals for kind in BandKind}
    frame = band_table(bands, ["a", "b"])
    assert frame.iloc[0]["a"] == "0.0"
    assert frame.iloc[1]["a"] == "[0.0, 0.0]"


def test_write_table_roundtrip(tmp_path, bands):
    path = write_table(tmp_path / "table.csv", bands, NAMES)
    frame = pd.read_csv(path, keep_default_na=False)
    assert frame.shape == (7, 4)
    assert frame.iloc[6]["region"] == "Band -- sup-t"


def test_grid_csv_full_precision(tmp_path):
    grid = np.linspace(0.0, 1.0, 5)
    pred = GridPrediction(grid=grid, estimate=grid / 3.0, covariance=np.eye(5) * 0.1)
    pred = band_for_grid(pred, 0.05, BandKind.POINTWISE)
    assert list(grid_frame(pred).columns) == ["x", "estimate", "se", "pointwise_lower", "pointwise_upper"]
    path = write_grid(tmp_path / "grid.csv", pred)
    frame = pd.read_csv(path, float_precision="round_trip")
    np.testing.assert_array_equal(frame["estimate"].to_numpy(), pred.estimate)


def test_json_rejects_nan():
    with pytest.raises(ValueError):
        dumps({"value": float("nan")})


def test_json_result_roundtrip(tmp_path, bands):
    region = ellipsoid(THETA, COV, 0.05)
    payload = {"command": "effects", "regions": regions_to_dict(bands, region)}
    path = write_result(tmp_path / "result.json", payload)
    data = read_result(path)
    assert data["schema_version"] == 1
    regions = data["regions"]
    assert set(regions) == {"pointwise", "bonferroni", "supt", "ellipsoid"}
    assert regions["supt"]["lower"] == bands[BandKind.SUPT].lower.tolist()
    assert regions["ellipsoid"]["boundary"][0] == regions["ellipsoid"]["boundary"][-1]
    assert json.loads(dumps(payload)) == data


def test_affine_map_is_monotone():
    amap = AffineMap.from_bounds(0.0, 10.0, -5.0, 5.0)
    assert amap.px(10.0) > amap.px(0.0)
    assert amap.py(5.0) < amap.py(-5.0)
    degenerate = AffineMap.from_bounds(3.0, 3.0, 1.0, 1.0)
    assert np.isfinite(degenerate.px(3.0))


def test_effects_figure_is_valid_svg(tmp_path, bands):
    region = ellipsoid(THETA, COV, 0.05)
    content = render_effects_figure(bands, region, NAMES)
    assert content.startswith("<?xml")
    root = ET.fromstring(write_figure(tmp_path / "figure.svg", content).read_bytes())
    assert root.tag == f"{SVG_NS}svg"
    ids = {element.get("id") for element in root.iter() if element.get("id")}
    assert {"supt", "pointwise", "ellipsoid", "estimate"} <= ids
    points = root.find(f"{SVG_NS}polyline[@id='ellipsoid']").get("points").split()
    assert len(points) == 361
    assert points[0] == points[-1]
    assert "data-to-pixel transform" in content


def test_effects_figure_without_ellipse(bands):
    root = ET.fromstring(render_effects_figure(bands, None, NAMES).encode())
    assert root.find(f"{SVG_NS}polyline[@id='ellipsoid']") is None


def test_grid_figure_draws_widest_band_first():
    grid = np.linspace(0.0, 1.0, 20)
    pred = GridPrediction(grid=grid, estimate=np.sin(grid), covariance=0.01 * (np.eye(20) + 0.5))
    for kind in BandKind:
        pred = band_for_grid(pred, 0.05, kind, m=5000, seed=1)
    root = ET.fromstring(render_grid_figure(pred, xlabel="cd40").encode())
    polygons = [el.get("id") for el in root.iter(f"{SVG_NS}polygon")]
    assert polygons == ["bonferroni", "supt", "pointwise"]
    assert root.find(f"{SVG_NS}polyline[@id='estimate']") is not None


def test_coverage_table_columns():
    report = CoverageReport(
        scenario=SimScenario(seed=0),
        simultaneous={"pointwise": 0.9, "bonferroni": 0.95, "supt": 0.95, "ellipsoid": 0.95},
        marginal={"pointwise": [0.95, 0.95], "bonferroni": [0.975, 0.975], "supt": [0.97, 0.97]},
        mean_critical_values={"pointwise": 1.96, "bonferroni": 2.241, "supt": 2.236},
        n_completed=10,
        n_failed=0,
    )
    frame = coverage_table(report)
    assert list(frame["method"]) == ["pointwise", "bonferroni", "supt", "ellipsoid"]
    assert frame.loc[frame["method"] == "ellipsoid", "marginal_1"].isna().all()
    assert frame.loc[frame["method"] == "supt", "mean_critical_value"].item() == pytest.approx(2.236)
