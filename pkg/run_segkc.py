#!/usr/bin/env python3

# Run this script from the repository root for imports to work correctly

import logging
import sys
import time
from typing import List, Optional

from cli.arguments import parse_args
from cli.commands import COMMANDS
from utils.colors import error, info
from utils.errors import ConfigError, SegKCError
from utils.logging import setup_logging

logger = logging.getLogger(__name__)


def print_header(command: str) -> None:
    print(info(f"segkc {command}"))


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code.

    0 success, 2 configuration error, 3 data or checkpoint error,
    4 numerical divergence, 1 anything else.
    """
    try:
        args, overrides = parse_args(argv)
    except ConfigError as e:
        print(error(str(e)), file=sys.stderr)
        return e.exit_code

    setup_logging(args.log_level, args.log_file)
    print_header(args.command)
    start_time = time.time()
    try:
        code = COMMANDS[args.command](args, overrides)
    except SegKCError as e:
        print(error(f"{type(e).__name__}: {e}"), file=sys.stderr)
        logger.debug("Failure details", exc_info=True)
        return e.exit_code
    except KeyboardInterrupt:
        print(error("Interrupted"), file=sys.stderr)
        return 130
    logger.info(f"{args.command} finished in {time.time() - start_time:.1f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
