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
"""Estimating functions and design builders for the effect and effect-modification analyses."""
from simulband.estimators.data import Dataset, build_confounder_design
from simulband.estimators.effects import build_effects_model, build_ipw_effects_model
from simulband.estimators.msm import (
    MsmLayout,
    build_emm_binary_model,
    build_emm_binary_ipw_model,
    build_emm_continuous_model,
)
from simulband.estimators.predict import GridPrediction, GRID_PRESETS, linear_contrast, make_grid, predict_cace
from simulband.estimators.spline import SplineSpec, default_knots, spline_design

__all__ = [
    "Dataset",
    "build_confounder_design",
    "build_effects_model",
    "build_ipw_effects_model",
    "MsmLayout",
    "build_emm_binary_model",
    "build_emm_binary_ipw_model",
    "build_emm_continuous_model",
    "GridPrediction",
    "GRID_PRESETS",
    "linear_contrast",
    "make_grid",
    "predict_cace",
    "SplineSpec",
    "default_knots",
    "spline_design",
]
