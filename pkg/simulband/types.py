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
"""Type definitions for simulband."""
from enum import Enum


class Command(Enum):
    EFFECTS = "effects"
    EMM_BINARY = "emm-binary"
    EMM_CONTINUOUS = "emm-continuous"
    SIMULATE = "simulate"


class BandKind(Enum):
    POINTWISE = "pointwise"
    BONFERRONI = "bonferroni"
    SUPT = "supt"

    @property
    def label(self):
        return {
            BandKind.POINTWISE: "Intervals",
            BandKind.BONFERRONI: "Band -- Bonferroni",
            BandKind.SUPT: "Band -- sup-t",
        }[self]


class SplineKind(Enum):
    RESTRICTED_CUBIC = "restricted-cubic"
    LINEAR = "linear"


class SolverStatus(Enum):
    """Stopping condition that ended the Newton iterations."""

    ROOT = "root"
    STEP = "step"
