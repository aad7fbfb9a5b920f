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
"""Exceptions raised by simulband.

Every user-facing failure derives from :class:`SimulbandError`. The ``exit_code`` class attribute is what the
command line returns when the error escapes a subcommand.
"""
from typing import Optional


class SimulbandError(RuntimeError):
    exit_code = 1


# data / configuration


class InvalidArgument(SimulbandError, ValueError):
    exit_code = 2


class MissingColumn(SimulbandError):
    exit_code = 2

    def __init__(self, column: str, source: Optional[str] = None):
        self.column = column
        msg = f"Missing column '{column}'"
        if source:
            msg += f" in {source}"
        super().__init__(msg)


class NonBinaryAction(SimulbandError):
    exit_code = 2


class EmptyAfterFiltering(SimulbandError):
    exit_code = 2


class EmptyArm(SimulbandError):
    exit_code = 2


class InvalidKnots(SimulbandError, ValueError):
    exit_code = 2


class GridOutOfRange(SimulbandError, ValueError):
    exit_code = 2


# numerical


class NonConvergence(SimulbandError):
    exit_code = 3

    def __init__(self, msg: str, root_norm: float, iterations: int):
        self.root_norm = root_norm
        self.iterations = iterations
        super().__init__(f"{msg} (root_norm={root_norm:.3e}, iterations={iterations})")


class SingularJacobian(SimulbandError):
    exit_code = 3


class NonFiniteResidual(SimulbandError):
    exit_code = 3


# regions


class NegativeVariance(SimulbandError):
    exit_code = 4


class NonPsdCovariance(SimulbandError):
    exit_code = 4


class SingularCovariance(SimulbandError):
    exit_code = 4


class RegionOrderingError(SimulbandError):
    exit_code = 4
