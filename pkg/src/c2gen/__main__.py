"""Usage: python -m c2gen <command> [options]"""

from .runner import cli

if __name__ == "__main__":
    cli()
