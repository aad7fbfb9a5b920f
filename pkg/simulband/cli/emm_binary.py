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
"""Command line subcommand for effect modification by a binary variable."""
from simulband.logging import get_logger
from simulband.types import Command

from .common import add_analysis_options, run_command

logger = get_logger()


def get_parser(subparsers):
    """Define and return a subparser for the emm-binary subcommand."""
    parser = subparsers.add_parser(
        "emm-binary", description="Confidence regions for effect modification by a binary variable."
    )
    parser.set_defaults(func=handle)
    add_analysis_options(parser)
    return parser


def handle(args):
    """Callback function which will be called to process the emm-binary subcommand."""
    return run_command(args, Command.EMM_BINARY)
