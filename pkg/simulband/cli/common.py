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
"""Helpers shared by the simulband subcommands."""
from typing import Optional

from simulband.flow import SimulbandFlow
from simulband.logging import get_logger, set_log_file, set_log_level
from simulband.types import Command
from simulband.utils import merge_dicts, str2bool

logger = get_logger()


def handle_logging_flags(args):
    if args.log is not None:
        set_log_level(args.log.upper())
    if getattr(args, "log_file", None):
        set_log_file(args.log_file)


def add_common_options(parser):
    parser.add_argument(
        "--log",
        default=None,
        choices=["critical", "error", "warning", "info", "debug"],
        help="Console log level (default: logging.console.level from the settings, else info)",
    )
    parser.add_argument(
        "--log-file",
        metavar="PATH",
        type=str,
        default=None,
        help="Additionally write a detailed log to this file (default: %(default)s)",
    )


def add_analysis_options(parser, ipw: bool = True):
    group = parser.add_argument_group("analysis options")
    group.add_argument("--config", "-c", metavar="PATH", default=None, help="YAML settings file")
    group.add_argument("--preset", metavar="NAME", default=None, help="Bundled settings preset (e.g. actg175)")
    group.add_argument("--data", "-d", metavar="CSV", default=None, help="Input CSV file with a header row")
    group.add_argument("--alpha", type=float, default=None, help="Significance level (default: 0.05)")
    group.add_argument("--m", type=int, default=None, help="Monte Carlo draws for sup-t (default: 10000)")
    group.add_argument("--seed", type=int, default=None, help="Random seed (default: $SIMULBAND_SEED or 0)")
    group.add_argument("--out", "-o", metavar="DIR", default=None, help="Output directory (default: out)")
    group.add_argument(
        "--parallel", "-j", type=int, default=None, help="Number of worker threads (default: all cores)"
    )
    if ipw:
        group.add_argument(
            "--ipw",
            nargs="?",
            const=True,
            default=None,
            type=str2bool,
            help="Use inverse probability weighting (--ipw, --ipw=false)",
        )


def overrides_from_args(args, command: Command) -> dict:
    """Settings layer holding only the flags given on the command line."""
    ret: dict = {"command": command.value}

    def put(value, *path):
        if value is None:
            return
        layer = {path[-1]: value}
        for key in reversed(path[:-1]):
            layer = {key: layer}
        merge_dicts(ret, layer)

    put(args.data, "data_path")
    put(args.out, "output_dir")
    put(getattr(args, "ipw", None), "ipw")
    put(args.alpha, "bands", "alpha")
    put(args.seed, "bands", "seed")
    put(args.parallel, "bands", "parallel")
    if command == Command.SIMULATE:
        put(args.m, "simulation", "m")
    else:
        put(args.m, "bands", "m")
    return ret


def run_command(args, command: Command, extra: Optional[dict] = None) -> int:
    overrides = overrides_from_args(args, command)
    if extra:
        merge_dicts(overrides, extra)
    flow = SimulbandFlow.from_sources(config_file=args.config, preset=args.preset, overrides=overrides)
    if args.log is None:
        set_log_level(flow.settings.logging.console.level)
    _, written = flow.run(command)
    logger.info("Results written to %s", written["result"].parent)
    return 0
