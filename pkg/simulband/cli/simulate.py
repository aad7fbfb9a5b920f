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
"""Command line subcommand for the repeated-sampling coverage study."""
from simulband.logging import get_logger
from simulband.types import Command

from .common import add_analysis_options, run_command

logger = get_logger()


def add_simulate_options(parser):
    group = parser.add_argument_group("simulation options")
    group.add_argument("--k", type=int, default=None, help="Number of parameters (default: 2)")
    group.add_argument("--rho", type=float, default=None, help="Equicorrelation of the outcomes (default: 0)")
    group.add_argument("--n", type=int, default=None, help="Observations per replicate (default: 500)")
    group.add_argument("--reps", type=int, default=None, help="Number of replicates (default: 10000)")
    group.add_argument("--progress", action="store_true", help="Show a progress bar")


def get_parser(subparsers):
    """Define and return a subparser for the simulate subcommand."""
    parser = subparsers.add_parser("simulate", description="Empirical coverage of the confidence regions.")
    parser.set_defaults(func=handle)
    add_analysis_options(parser, ipw=False)
    add_simulate_options(parser)
    return parser


def handle(args):
    """Callback function which will be called to process the simulate subcommand."""
    sim = {"k": args.k, "rho": args.rho, "n_per_rep": args.n, "reps": args.reps}
    sim = {key: value for key, value in sim.items() if value is not None}
    if args.progress:
        sim["show_progress"] = True
    return run_command(args, Command.SIMULATE, extra={"simulation": sim} if sim else None)
