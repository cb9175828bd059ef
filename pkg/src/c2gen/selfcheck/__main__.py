"""Entry point for running the self-check as a module.

Usage: python -m c2gen.selfcheck
"""

from . import cli

if __name__ == "__main__":
    cli()
