"""
CLI modules for ci-lab.

This package provides the command-line interface and the CI statement grammar.
"""

from ci_lab.cli_main import main

__all__ = ["main"]
