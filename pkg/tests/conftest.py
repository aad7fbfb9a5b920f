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
"""Shared fixtures for the simulband tests."""
import numpy as np
import pandas as pd
import pytest

from simulband.estimators import Dataset
from simulband.settings import ColumnSettings

ACTG_COLUMNS = ["treat", "cd420", "cd820", "gender", "cd40", "age", "race", "drugs", "karnof", "cd80"]


def make_dataset(arrays, **mapping):
    return Dataset.from_arrays(arrays, ColumnSettings(**mapping))


def actg_like_frame(n: int = 300, seed: int = 1) -> pd.DataFrame:
    """Synthetic data with the ACTG 175 column names and plausible ranges."""
    rng = np.random.default_rng(seed)
    age = rng.integers(18, 65, n).astype(float)
    race = rng.integers(0, 2, n)
    drugs = rng.integers(0, 2, n)
    karnof = rng.choice([70, 80, 90, 100], n, p=[0.1, 0.2, 0.4, 0.3])
    cd40 = rng.normal(350, 100, n).clip(50, 800).round()
    cd80 = rng.normal(980, 300, n).clip(100, 2500).round()
    gender = rng.integers(0, 2, n)
    logit = -0.5 + 0.01 * (age - 35) + 0.3 * race - 0.2 * drugs + 0.002 * (cd40 - 350)
    treat = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(int)
    cd420 = (cd40 + 40 * treat + 0.05 * treat * (cd40 - 350) + 10 * gender + rng.normal(0, 80, n)).round()
    cd820 = (cd80 + 5 * treat + rng.normal(0, 250, n)).round()
    return pd.DataFrame(
        {
            "treat": treat,
            "cd420": cd420,
            "cd820": cd820,
            "gender": gender,
            "cd40": cd40,
            "age": age,
            "race": race,
            "drugs": drugs,
            "karnof": karnof,
            "cd80": cd80,
        }
    )[ACTG_COLUMNS]


@pytest.fixture
def toy_trial():
    """Eight rows, two outcomes, four per arm."""
    return make_dataset(
        {
            "a": [1, 1, 1, 1, 0, 0, 0, 0],
            "y1": [10.0, 12.0, 9.0, 13.0, 7.0, 8.0, 6.0, 9.0],
            "y2": [3.0, 5.0, 4.0, 8.0, 2.0, 6.0, 1.0, 3.0],
        },
        action="a",
        outcomes=["y1", "y2"],
    )


@pytest.fixture
def actg_frame():
    return actg_like_frame()


@pytest.fixture
def actg_csv(tmp_path, actg_frame):
    path = tmp_path / "actg_like.csv"
    actg_frame.to_csv(path, index=False)
    return path
