"""
Command-line surface: one module per subcommand, each registering its parser.
"""

import argparse

from starkchain.cli import classify, entanglement, localization_map, reproduce, skin_factor, spectrum
from starkchain.cli.common import global_parent, params_parent

COMMAND_MODULES = (skin_factor, classify, localization_map, entanglement, spectrum, reproduce)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starkchain",
        description="Non-Hermitian Stark chain simulator with graded nonreciprocal hopping",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [global_parent(), params_parent()]
    for module in COMMAND_MODULES:
        module.register(subparsers, parents)
    return parser


__all__ = ["build_parser", "COMMAND_MODULES"]
