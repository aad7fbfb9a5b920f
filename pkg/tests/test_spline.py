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
"""Tests for the restricted cubic spline basis."""
import numpy as np
import pytest

from simulband.errors import InvalidKnots
from simulband.estimators import SplineSpec, default_knots, spline_design
from simulband.estimators.spline import spline_names
from simulband.types import SplineKind


def scalar_rcs_term(x, knots, j):
    """Direct transcription of the truncated-power restricted cubic term."""

    def pos3(v):
        return max(v, 0.0) ** 3

    t = knots
    k = len(t)
    return (
        pos3(x - t[j])
        - pos3(x - t[k - 2]) * (t[k - 1] - t[j]) / (t[k - 1] - t[k - 2])
        + pos3(x - t[k - 1]) * (t[k - 2] - t[j]) / (t[k - 1] - t[k - 2])
    )


def test_columns_and_names():
    spec = SplineSpec(knots=(0.0, 1.0, 2.0, 5.0))
    design = spline_design(np.linspace(-1, 6, 11), spec)
    assert design.shape == (11, 3)
    assert spline_names(spec) == ("s1", "s2", "s3")
    np.testing.assert_array_equal(design[:, 0], np.linspace(-1, 6, 11))


def test_zero_at_or_below_first_knot():
    spec = SplineSpec(knots=(10.0, 20.0, 30.0, 40.0))
    design = spline_design([-5.0, 0.0, 10.0], spec)
    np.testing.assert_array_equal(design[:, 1:], 0.0)


def test_three_knots_at_one_and_a_half():
    knots = (0.0, 1.0, 2.0)
    raw = spline_design([1.5], SplineSpec(knots=knots, normalize=False))
    assert raw[0, 1] == pytest.approx(scalar_rcs_term(1.5, knots, 0), abs=1e-12)
    assert raw[0, 1] == pytest.approx(3.125, abs=1e-12)
    normalized = spline_design([1.5], SplineSpec(knots=knots))
    assert normalized[0, 1] == pytest.approx(3.125 / 4.0, abs=1e-12)


def test_matches_scalar_formula_everywhere():
    knots = (1.0, 2.5, 4.0, 7.0, 9.0)
    xs = np.linspace(0, 12, 37)
    design = spline_design(xs, SplineSpec(knots=knots, normalize=False))
    for i, x in enumerate(xs):
        for j in range(len(knots) - 2):
            assert design[i, j + 1] == pytest.approx(scalar_rcs_term(x, knots, j), rel=1e-12, abs=1e-9)


def test_linear_beyond_last_knot():
    spec = SplineSpec(knots=(0.0, 1.0, 2.0, 3.0))
    xs = np.linspace(3.0, 8.0, 21)
    design = spline_design(xs, spec)
    second = np.diff(design, n=2, axis=0)
    assert np.max(np.abs(second)) <= 1e-8


def test_default_knots_at_conventional_percentiles():
    x = np.arange(101, dtype=float)
    np.testing.assert_allclose(default_knots(x), [5.0, 35.0, 65.0, 95.0])
    assert len(default_knots(x, n_knots=5)) == 5


def test_from_data_uses_defaults():
    spec = SplineSpec.from_data(np.arange(101, dtype=float))
    assert spec.n_knots == 4
    assert spec.n_columns == 3


def test_linear_kind_is_a_single_column():
    spec = SplineSpec(kind=SplineKind.LINEAR)
    assert spec.n_columns == 1
    np.testing.assert_array_equal(spline_design([1.0, 2.0], spec), [[1.0], [2.0]])


@pytest.mark.parametrize("knots", [(0.0, 1.0), (0.0, 2.0, 1.0), (0.0, 1.0, 1.0), (0.0, np.inf, 3.0)])
def test_invalid_knots(knots):
    with pytest.raises(InvalidKnots):
        SplineSpec(knots=knots)


def test_tied_default_knots_raise():
    with pytest.raises(InvalidKnots):
        default_knots(np.zeros(50))
    with pytest.raises(InvalidKnots):
        default_knots(np.arange(10.0), n_knots=9)
