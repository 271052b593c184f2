"""
Command-line interface for ci-lab.
"""

import logging
import sys

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s"


def _configure_logging(argv: list[str]) -> None:
    from ci_lab.config import get_settings

    level = "DEBUG" if ("-v" in argv or "--verbose" in argv) else get_settings().log_level
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stderr)


def main() -> None:
    """
    Main CLI entry point.

    Commands:
        verify-paper: Check both counterexamples and the overlap variant
        check: Evaluate independence statements on a table file
        search: Search for a counterexample to an implication query
        deconf: Run the deconfounder pipeline on a known table
        version: Show version information
    """
    argv = sys.argv[1:]
    _configure_logging(argv)

    from ci_lab.cli.commands import run

    sys.exit(run(argv))


if __name__ == "__main__":
    main()
