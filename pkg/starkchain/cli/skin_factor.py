"""
skin-factor: gauge factors, power-law exponent fit and increment fit.
"""

import argparse

from starkchain.cli.common import collect_params, file_values, output_dir, pick, validated
from starkchain.core.config import get_settings
from starkchain.models import Command, FitSpec, RunConfig


def register(subparsers: argparse._SubParsersAction, parents) -> None:
    parser = subparsers.add_parser(Command.SKIN_FACTOR.value, parents=parents,
                                   help="gauge factors d_j and their power-law fits")
    parser.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"),
                        help="1-based inclusive site window for the log-log fit")
    parser.add_argument("--increment-window", dest="increment_window", type=int, nargs=2,
                        metavar=("LO", "HI"), help="1-based inclusive bond window for the increment fit")
    parser.set_defaults(build_config=build_config)


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = get_settings()
    values = file_values(args)
    params = collect_params(args, values)
    fit = validated(lambda: FitSpec(
        window=tuple(pick(args, values, "window", default=cfg.fit_window)),
        increment_window=tuple(pick(args, values, "increment_window", default=cfg.increment_window)),
    ))
    return validated(lambda: RunConfig(command=Command.SKIN_FACTOR, params=params, fit=fit,
                                       output_dir=output_dir(args)))
