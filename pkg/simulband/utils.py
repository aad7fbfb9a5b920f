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
"""simulband utility functions."""
import multiprocessing
import os
from pathlib import Path
from typing import Optional, Union

from simulband.errors import InvalidArgument
from simulband.logging import get_logger

logger = get_logger()

NUM_THREADS = multiprocessing.cpu_count()

SEED_ENV_VAR = "SIMULBAND_SEED"
DEFAULT_SEED = 0

TRUTHY = frozenset({"y", "yes", "t", "true", "on", "1"})
FALSY = frozenset({"n", "no", "f", "false", "off", "0"})


def str2bool(value, allow_none: bool = False) -> Optional[bool]:
    """Parse command line style booleans (``--ipw=false``)."""
    if value is None and allow_none:
        return None
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value != 0
    lowered = str(value).strip().lower()
    if lowered in TRUTHY:
        return True
    if lowered in FALSY:
        return False
    raise ValueError(f"Invalid truth value: {value!r}")


def resolve_seed(seed: Optional[int] = None) -> int:
    """Explicit seed, else ``$SIMULBAND_SEED``, else the package default."""
    if seed is not None:
        return int(seed)
    env_seed = os.getenv(SEED_ENV_VAR)
    if env_seed is None:
        return DEFAULT_SEED
    try:
        ret = int(env_seed)
    except ValueError as err:
        raise InvalidArgument(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from err
    logger.debug("Using seed %d from %s", ret, SEED_ENV_VAR)
    return ret


def ensure_directory(path: Union[str, Path]) -> Path:
    """Create ``path`` (and parents) if needed and return it resolved."""
    path = Path(path)
    if path.exists() and not path.is_dir():
        raise InvalidArgument(f"Output path exists and is not a directory: {path}")
    path.mkdir(parents=True, exist_ok=True)
    return path.resolve()


def merge_dicts(base: dict, update: dict) -> dict:
    """Recursively merge ``update`` into ``base`` in place; values of ``update`` win, nested dicts are merged."""
    for key, value in update.items():
        current = base.get(key)
        if isinstance(current, dict) and isinstance(value, dict):
            merge_dicts(current, value)
        else:
            base[key] = value
    return base
