"""
localization-map: mean polarization and top-20% IPR over a (gamma, F1/F2) grid.

F1 is set per cell from the ratio grid, so --F1 / --ratio are optional here.
"""

import argparse

from starkchain.cli.common import collect_params, file_values, output_dir, pick, validated
from starkchain.models import Command, GridSpec, RunConfig


def _grid_arg(parser: argparse.ArgumentParser, flag: str, help_text: str) -> None:
    parser.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"), nargs=3, metavar=("START", "STOP", "NUM"),
                        help=help_text)


def register(subparsers: argparse._SubParsersAction, parents) -> None:
    parser = subparsers.add_parser(Command.LOCALIZATION_MAP.value, parents=parents,
                                   help="polarization / IPR map over nonreciprocity and field ratio")
    _grid_arg(parser, "--gamma-grid", "linspace for gamma")
    _grid_arg(parser, "--ratio-grid", "linspace for F1/F2")
    parser.add_argument("--cuts", type=float, nargs="+", help="gamma values for line cuts")
    parser.set_defaults(build_config=build_config)


def _triple(raw):
    if raw is None:
        return None
    start, stop, num = raw
    return float(start), float(stop), int(num)


def build_config(args: argparse.Namespace) -> RunConfig:
    values = file_values(args)
    if pick(args, values, "F1") is None and pick(args, values, "ratio") is None:
        values = {**values, "F1": 0.0}
    params = collect_params(args, values)
    defaults = GridSpec()
    grids = validated(lambda: GridSpec(
        gamma=_triple(args.gamma_grid) or values.get("gamma_grid", defaults.gamma),
        ratio=_triple(args.ratio_grid) or values.get("ratio_grid", defaults.ratio),
        cuts=tuple(pick(args, values, "cuts", default=defaults.cuts)),
    ))
    return validated(lambda: RunConfig(command=Command.LOCALIZATION_MAP, params=params, grids=grids,
                                       output_dir=output_dir(args)))
