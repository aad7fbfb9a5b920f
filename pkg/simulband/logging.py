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
"""Logging utilities for simulband.

Everything goes through the ``simulband`` logger. The console gets short ``LEVEL - message`` lines. Every analysis
run also writes a detailed log next to its results (see :func:`run_log`).
"""

import contextlib
import logging
import logging.handlers
import sys
import time

LOGGER_NAME = "simulband"
MINIMAL_FORMAT = "%(levelname)s - %(message)s"
DETAILED_FORMAT = "[%(asctime)s]::%(module)s:%(lineno)d::%(levelname)s - %(message)s"

_log_file_handler = None


def get_formatter(minimal=False):
    """Returns a log formatter for one of the two predefined formats."""
    return logging.Formatter(MINIMAL_FORMAT if minimal else DETAILED_FORMAT)


def get_logger():
    """The simulband logger; the console handler is installed on first use."""
    logger = logging.getLogger(LOGGER_NAME)
    if len(logger.handlers) == 0:
        stream_handler = logging.StreamHandler(sys.stdout)
        stream_handler.setFormatter(get_formatter(minimal=True))
        stream_handler.setLevel(logging.INFO)
        logger.addHandler(stream_handler)
        # handlers filter, the logger itself lets everything through to the file logs
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
    return logger


def _is_file_handler(handler) -> bool:
    return isinstance(handler, logging.FileHandler)


def set_log_level(console_level=None, file_level=None):
    """Set console and/or file log levels at runtime."""
    for handler in get_logger().handlers:
        if _is_file_handler(handler):
            if file_level is not None:
                handler.setLevel(file_level)
        elif console_level is not None:
            handler.setLevel(console_level)


def _make_file_handler(path, level, rotate):
    if rotate:
        handler = logging.handlers.TimedRotatingFileHandler(filename=path, when="midnight", backupCount=30)
    else:
        handler = logging.FileHandler(path, mode="a", encoding="utf-8")
    handler.setFormatter(get_formatter())
    handler.setLevel(level)
    return handler


def set_log_file(path, level=logging.DEBUG, rotate=False):
    """Additionally log to ``path`` for the rest of the process (``--log-file``)."""
    global _log_file_handler
    logger = get_logger()
    if _log_file_handler is not None:
        logger.removeHandler(_log_file_handler)
        _log_file_handler.close()
    _log_file_handler = _make_file_handler(path, level, rotate)
    logger.addHandler(_log_file_handler)


@contextlib.contextmanager
def run_log(path, level=logging.DEBUG, rotate=False):
    """Copy everything logged inside the block to ``path``."""
    logger = get_logger()
    handler = _make_file_handler(path, level, rotate)
    logger.addHandler(handler)
    try:
        yield handler
    finally:
        logger.removeHandler(handler)
        handler.close()


@contextlib.contextmanager
def timed(metrics: dict, key: str):
    """Record the wall time of the block in ``metrics[key]`` (seconds)."""
    start = time.perf_counter()
    try:
        yield
    finally:
        metrics[key] = time.perf_counter() - start
        get_logger().debug("%s took %.3fs", key, metrics[key])
