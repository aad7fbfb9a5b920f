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
"""Settings module for simulband."""
import copy
import logging
from pathlib import Path
from dataclasses import dataclass, field, asdict
from typing import List, Union, Optional, Dict

import yaml
from dacite import Config, DaciteError, from_dict

from simulband.errors import InvalidArgument
from simulband.types import Command, SplineKind
from simulband.utils import merge_dicts


DEFAULT_SETTINGS = {
    "name": "default",
    "command": None,
    "data_path": None,
    "output_dir": "out",
    "ipw": False,
    "logging": {
        "console": {
            "level": "INFO",
        },
        "file": {
            "level": "DEBUG",
            "rotate": False,
        },
    },
    "columns": {
        "action": "treat",
        "outcomes": [],
        "modifiers": [],
        "confounders": [],
        "categorical": [],
        "bins": {},
    },
    "effects": {
        "outcomes": [],
    },
    "emm_binary": {
        "outcome": None,
        "modifier": None,
    },
    "emm_continuous": {
        "outcome": None,
        "modifier": None,
    },
    "spline": {
        "kind": "restricted-cubic",
        "knots": None,
        "n_knots": 4,
        "normalize": True,
    },
    "grid": {
        "size": 50,
    },
    "bands": {
        "alpha": 0.05,
        "m": 10000,
        "seed": None,
        "parallel": None,
        "n_boundary_points": 360,
    },
    "solver": {
        "tolerance": 1e-9,
        "max_iterations": 100,
        "max_halvings": 20,
        "step_tolerance": 1e-12,
    },
    "simulation": {
        "k": 2,
        "rho": 0.0,
        "variances": None,
        "true_theta": None,
        "n_per_rep": 500,
        "reps": 10000,
        "m": 10000,
        "show_progress": False,
    },
}

DACITE_CONFIG = Config(cast=[float], strict=True)


PLAIN_TYPES = (int, float, str, bool, type(None))


def _check_plain(data, where: str = "settings"):
    """Settings must round-trip through plain YAML."""
    if isinstance(data, dict):
        for key, value in data.items():
            _check_plain(value, f"{where}.{key}")
    elif isinstance(data, list):
        for i, value in enumerate(data):
            _check_plain(value, f"{where}[{i}]")
    else:
        assert isinstance(data, PLAIN_TYPES), f"{where}: unsupported type {type(data).__name__}"


def load_layer(path: Path) -> dict:
    """Raw settings dict from a YAML file, for use with ``from_layers``."""
    with open(path, "r", encoding="utf-8") as file:
        try:
            data = yaml.safe_load(file)
        except yaml.YAMLError as err:
            raise InvalidArgument(f"Could not parse config file {path}: {err}") from err
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidArgument(f"Invalid config file (expected a mapping): {path}")
    return data


class YAMLSettings:
    """Typed settings built from plain dicts or YAML files via dacite."""

    @classmethod
    def from_dict(cls, data: dict):
        try:
            return from_dict(data_class=cls, data=data, config=DACITE_CONFIG)
        except DaciteError as err:
            raise InvalidArgument(f"Invalid settings: {err}") from err

    @classmethod
    def from_yaml_file(cls, path: Path):
        return cls.from_dict(load_layer(path))

    @classmethod
    def from_layers(cls, *layers: Optional[dict]):
        """Build settings from dicts of increasing precedence (later layers win)."""
        data: dict = {}
        for layer in layers:
            if layer:
                merge_dicts(data, copy.deepcopy(layer))
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        data = asdict(self)
        _check_plain(data)
        return data

    def to_yaml_file(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")
        return path


@dataclass
class ConsoleLoggingSettings(YAMLSettings):
    level: Union[int, str] = logging.INFO


@dataclass
class FileLoggingSettings(YAMLSettings):
    level: Union[int, str] = logging.DEBUG
    rotate: bool = False


@dataclass
class LoggingSettings(YAMLSettings):
    console: ConsoleLoggingSettings
    file: FileLoggingSettings


@dataclass
class ColumnSettings(YAMLSettings):
    action: str = "treat"
    outcomes: List[str] = field(default_factory=list)
    modifiers: List[str] = field(default_factory=list)
    confounders: List[str] = field(default_factory=list)
    categorical: List[str] = field(default_factory=list)
    # column -> cut points, turns a numeric column into a categorical one
    bins: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def mapped(self) -> List[str]:
        ret = [self.action]
        for col in self.outcomes + self.modifiers + self.confounders:
            if col not in ret:
                ret.append(col)
        return ret


@dataclass
class EffectsSettings(YAMLSettings):
    outcomes: List[str] = field(default_factory=list)


@dataclass
class ModificationSettings(YAMLSettings):
    outcome: Optional[str] = None
    modifier: Optional[str] = None


@dataclass
class SplineSettings(YAMLSettings):
    kind: str = SplineKind.RESTRICTED_CUBIC.value
    knots: Optional[List[float]] = None
    n_knots: int = 4
    normalize: bool = True


@dataclass
class GridSettings(YAMLSettings):
    size: int = 50


@dataclass
class BandSettings(YAMLSettings):
    alpha: float = 0.05
    m: int = 10000
    seed: Optional[int] = None
    parallel: Optional[int] = None
    n_boundary_points: int = 360


@dataclass
class SolverSettings(YAMLSettings):
    tolerance: float = 1e-9
    max_iterations: int = 100
    max_halvings: int = 20
    step_tolerance: float = 1e-12


@dataclass
class SimulationSettings(YAMLSettings):
    k: int = 2
    rho: float = 0.0
    variances: Optional[List[float]] = None
    true_theta: Optional[List[float]] = None
    n_per_rep: int = 500
    reps: int = 10000
    m: int = 10000
    show_progress: bool = False


@dataclass
class SimulbandSettings(YAMLSettings):
    name: Optional[str] = None
    command: Optional[str] = None
    data_path: Optional[str] = None
    output_dir: Optional[str] = None
    ipw: bool = False
    logging: Optional[LoggingSettings] = None
    columns: Optional[ColumnSettings] = None
    effects: Optional[EffectsSettings] = None
    emm_binary: Optional[ModificationSettings] = None
    emm_continuous: Optional[ModificationSettings] = None
    spline: Optional[SplineSettings] = None
    grid: Optional[GridSettings] = None
    bands: Optional[BandSettings] = None
    solver: Optional[SolverSettings] = None
    simulation: Optional[SimulationSettings] = None

    def validate(self):
        if self.command is not None:
            try:
                Command(self.command)
            except ValueError as err:
                raise InvalidArgument(f"Unknown command: {self.command}") from err
        alpha = self.bands.alpha
        if not 0.0 < alpha < 1.0:
            raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha}")
        if self.bands.m < 1000:
            raise InvalidArgument(f"m must be at least 1000, got {self.bands.m}")
        if self.grid.size < 1:
            raise InvalidArgument(f"grid size must be positive, got {self.grid.size}")
        try:
            SplineKind(self.spline.kind)
        except ValueError as err:
            raise InvalidArgument(f"Unknown spline kind: {self.spline.kind}") from err
        sim = self.simulation
        if sim.reps < 1:
            raise InvalidArgument("simulation.reps must be >= 1")
        if abs(sim.rho) > 1.0:
            raise InvalidArgument("simulation.rho must lie in [-1, 1]")
        if sim.variances is not None and any(v <= 0 for v in sim.variances):
            raise InvalidArgument("simulation.variances must be positive")
        return self

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir if self.output_dir else "out")
