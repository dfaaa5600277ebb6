"""
Main command-line entry point for the StarkChain simulator.

    python -m starkchain.app <command> [options]
"""

import sys
from typing import List, Optional

from starkchain.cli import build_parser
from starkchain.core.app import RunOutcome, get_app
from starkchain.core.errors import StarkChainError
from starkchain.core.logging import get_logger, setup_logging
from starkchain.services.output_service import render_json

logger = get_logger(__name__)


def dispatch(argv: Optional[List[str]] = None) -> RunOutcome:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        setup_logging(log_level=args.log_level)

    app = get_app()
    try:
        if args.command == "reproduce":
            return app.reproduce(args.figure, output_dir=args.out, threads=args.threads)
        config = args.build_config(args)
    except StarkChainError as e:
        logger.error(f"❌ {e.detail}")
        return RunOutcome(status=e.exit_code, error=e.detail)

    outcome = app.run(config, threads=args.threads)
    if outcome.status == 0 and getattr(args, "echo_summary", False):
        sys.stdout.write(render_json(outcome.summary))
    return outcome


def main(argv: Optional[List[str]] = None) -> int:
    return dispatch(argv).status


if __name__ == "__main__":
    sys.exit(main())
