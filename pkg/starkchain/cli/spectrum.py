"""
spectrum: biorthogonal eigensystem with per-state diagnostics.
"""

import argparse

from starkchain.cli.common import collect_params, file_values, output_dir, validated
from starkchain.models import Command, RunConfig


def register(subparsers: argparse._SubParsersAction, parents) -> None:
    parser = subparsers.add_parser(Command.SPECTRUM.value, parents=parents,
                                   help="eigenvalues, centroids, IPR and edge polarization")
    parser.set_defaults(build_config=build_config)


def build_config(args: argparse.Namespace) -> RunConfig:
    params = collect_params(args, file_values(args))
    return validated(lambda: RunConfig(command=Command.SPECTRUM, params=params, output_dir=output_dir(args)))
