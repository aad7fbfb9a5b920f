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
"""Utilities for handling simulband resources."""
from typing import List

import importlib_resources
import yaml

from simulband.errors import InvalidArgument

PRESET_SUFFIX = ".yml"


def list_presets() -> List[str]:
    ret = []
    for entry in importlib_resources.files("simulband.resources.presets").iterdir():
        if entry.is_file() and entry.name.endswith(PRESET_SUFFIX):
            ret.append(entry.name[: -len(PRESET_SUFFIX)])
    return sorted(ret)


def get_preset_path(name: str):
    ret = importlib_resources.files("simulband.resources.presets").joinpath(f"{name}{PRESET_SUFFIX}")
    if not ret.is_file():
        raise InvalidArgument(f"Unknown preset '{name}' (available: {', '.join(list_presets())})")
    return ret


def get_preset(name: str) -> dict:
    """Settings layer stored in a bundled preset."""
    data = yaml.safe_load(get_preset_path(name).read_text(encoding="utf-8"))
    assert isinstance(data, dict), f"Invalid preset: {name}"
    return data
