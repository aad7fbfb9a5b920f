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
"""CSV ingestion."""
from pathlib import Path
from typing import Union

import pandas as pd

from simulband.errors import InvalidArgument
from simulband.estimators.data import Dataset
from simulband.logging import get_logger
from simulband.settings import ColumnSettings

logger = get_logger()


def ingest_csv(path: Union[str, Path], mapping: ColumnSettings) -> Dataset:
    """Read a UTF-8 CSV with a header row and type the mapped columns.

    Only the mapped columns are converted; everything else in the file is ignored.
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidArgument(f"Data file not found: {path}")
    logger.info("Reading %s", path)
    try:
        frame = pd.read_csv(path, encoding="utf-8", skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as err:
        raise InvalidArgument(f"Could not parse {path}: {err}") from err
    frame.columns = [str(col).strip() for col in frame.columns]
    logger.debug("Read %d row(s) with columns %s", len(frame), list(frame.columns))
    data = Dataset.from_frame(frame, mapping, source=str(path))
    logger.info("Using %d of %d row(s) (%d dropped)", data.n, len(frame), data.dropped)
    return data
