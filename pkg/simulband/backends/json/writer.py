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
"""Writer for ``result.json``.

Floats are emitted with Python's shortest round-trip representation, so reading the file back reproduces every value
bit for bit. Key order follows insertion order, which keeps the output byte-identical across runs.
"""
import dataclasses
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from simulband.logging import get_logger
from simulband.mest import FitResult
from simulband.regions import Ellipsoid, IntervalSet

logger = get_logger()

SCHEMA_VERSION = 1


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key.value if isinstance(key, Enum) else key): to_jsonable(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(val) for val in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if dataclasses.is_dataclass(value):
        return to_jsonable(dataclasses.asdict(value))
    return value


def fit_to_dict(fit: FitResult) -> Dict[str, Any]:
    return {
        "names": list(fit.names),
        "theta_hat": fit.theta_hat,
        "covariance": fit.covariance,
        "n": fit.n,
        "root_norm": fit.root_norm,
        "iterations": fit.iterations,
        "status": fit.status.name.lower(),
        "interest": list(fit.interest_names),
        "diagnostics": dict(fit.diagnostics),
    }


def interval_set_to_dict(intervals: IntervalSet) -> Dict[str, Any]:
    return {
        "label": intervals.kind.label,
        "critical_value": intervals.critical_value,
        "lower": intervals.lower,
        "upper": intervals.upper,
        "widths": intervals.widths,
    }


def ellipsoid_to_dict(region: Ellipsoid) -> Dict[str, Any]:
    ret = {
        "center": region.center,
        "chisq_radius": region.chisq_radius,
        "volume": region.volume,
    }
    if region.boundary is not None:
        ret["boundary"] = region.boundary
    return ret


def regions_to_dict(bands: Dict[Any, IntervalSet], region: Optional[Ellipsoid] = None) -> Dict[str, Any]:
    ret = {kind.value: interval_set_to_dict(intervals) for kind, intervals in bands.items()}
    if region is not None:
        ret["ellipsoid"] = ellipsoid_to_dict(region)
    return ret


def dumps(payload: Dict[str, Any]) -> str:
    data = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(to_jsonable(data), indent=2, allow_nan=False) + "\n"


def write_result(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    path = Path(path)
    logger.debug("Writing %s", path)
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def read_result(path: Union[str, Path]) -> Dict[str, Any]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    assert data.get("schema_version") == SCHEMA_VERSION, f"Unsupported schema version in {path}"
    return data
