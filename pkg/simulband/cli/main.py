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
"""Console script for simulband."""
import argparse
import sys

from simulband.cli import effects, emm_binary, emm_continuous, simulate
from simulband.cli.common import add_common_options, handle_logging_flags
from simulband.errors import SimulbandError
from simulband.logging import get_logger
from simulband.version import __version__

logger = get_logger()

SUBCOMMANDS = (effects, emm_binary, emm_continuous, simulate)


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulband",
        description="Simultaneous confidence regions from M-estimation",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-V", "--version", action="version", version=f"simulband {__version__}")
    add_common_options(parser)
    subparsers = parser.add_subparsers(dest="subcommand", metavar="COMMAND")
    for module in SUBCOMMANDS:
        module.get_parser(subparsers)
    return parser


def main(args=None) -> int:
    """Run a subcommand; returns the process exit code."""
    parser = get_parser()
    args = parser.parse_args(args)
    handle_logging_flags(args)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except SimulbandError as err:
        logger.error("%s: %s", type(err).__name__, err)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())  # pragma: no cover
