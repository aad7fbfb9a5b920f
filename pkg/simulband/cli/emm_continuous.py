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
"""Command line subcommand for effect modification by a continuous variable."""
from simulband.estimators import GRID_PRESETS
from simulband.logging import get_logger
from simulband.types import Command

from .common import add_analysis_options, run_command

logger = get_logger()


def add_emm_continuous_options(parser):
    group = parser.add_argument_group("grid options")
    group.add_argument(
        "--grid-size",
        type=int,
        default=None,
        help="Number of evenly spaced modifier values (presets: %s; default: %d)"
        % (", ".join(map(str, GRID_PRESETS)), GRID_PRESETS[0]),
    )
    group.add_argument("--knots", type=int, default=None, help="Number of spline knots (3-7, default: 4)")


def get_parser(subparsers):
    """Define and return a subparser for the emm-continuous subcommand."""
    parser = subparsers.add_parser(
        "emm-continuous", description="Confidence bands for a conditional average causal effect over a grid."
    )
    parser.set_defaults(func=handle)
    add_analysis_options(parser)
    add_emm_continuous_options(parser)
    return parser


def handle(args):
    """Callback function which will be called to process the emm-continuous subcommand."""
    extra = {}
    if args.grid_size is not None:
        extra["grid"] = {"size": args.grid_size}
    if args.knots is not None:
        extra["spline"] = {"n_knots": args.knots}
    return run_command(args, Command.EMM_CONTINUOUS, extra=extra)
