"""
reproduce: run a compiled-in figure recipe and write a hash manifest.
"""

import argparse


def register(subparsers: argparse._SubParsersAction, parents) -> None:
    parser = subparsers.add_parser("reproduce", parents=parents[:1],
                                   help="regenerate the data behind fig1, fig2 or fig3")
    parser.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    parser.set_defaults(build_config=None)
