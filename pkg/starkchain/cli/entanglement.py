"""
entanglement: half-chain entropy of the even-site CDW under the non-unitary evolution.
"""

import argparse

from starkchain.cli.common import collect_params, file_values, output_dir, pick, validated
from starkchain.core.config import get_settings
from starkchain.models import Command, DynamicsSpec, RunConfig


def register(subparsers: argparse._SubParsersAction, parents) -> None:
    parser = subparsers.add_parser(Command.ENTANGLEMENT.value, parents=parents,
                                   help="half-chain entanglement entropy S(t)")
    parser.add_argument("--t-max", dest="t_max", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--restabilize-every", dest="restabilize_every", type=int,
                        help="QR re-orthonormalisation cadence in steps")
    parser.add_argument("--ratios", type=float, nargs="+",
                        help="F1/F2 values; three values also produce the excess entropy")
    parser.set_defaults(build_config=build_config)


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = get_settings()
    values = file_values(args)
    ratios = pick(args, values, "ratios")
    if ratios is not None and pick(args, values, "F1") is None and pick(args, values, "ratio") is None:
        values = {**values, "F1": 0.0}
    params = collect_params(args, values)
    dynamics = validated(lambda: DynamicsSpec(
        t_max=pick(args, values, "t_max", default=cfg.t_max),
        dt=pick(args, values, "dt", default=cfg.dt),
        restabilize_every=pick(args, values, "restabilize_every", default=cfg.restabilize_every),
        ratios=tuple(ratios) if ratios is not None else None,
    ))
    return validated(lambda: RunConfig(command=Command.ENTANGLEMENT, params=params, dynamics=dynamics,
                                       output_dir=output_dir(args)))
