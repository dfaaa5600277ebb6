"""
classify: asymptotic branch plus finite-size scales, echoed to stdout as JSON.
"""

import argparse

from starkchain.cli.common import collect_params, file_values, output_dir, validated
from starkchain.models import Command, RunConfig


def register(subparsers: argparse._SubParsersAction, parents) -> None:
    parser = subparsers.add_parser(Command.CLASSIFY.value, parents=parents,
                                   help="asymptotic branch and finite-size scales")
    parser.set_defaults(build_config=build_config, echo_summary=True)


def build_config(args: argparse.Namespace) -> RunConfig:
    params = collect_params(args, file_values(args))
    return validated(lambda: RunConfig(command=Command.CLASSIFY, params=params, output_dir=output_dir(args)))
