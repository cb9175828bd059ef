"""Self-check - run the oracle and property checks without pytest.

Run with: python -m c2gen.selfcheck

Checks:
- Composition table and function types
- Ninefold split constraints on the configured dataset
- Analytic vs finite-difference gradients
- Reservoir inclusion uniformity
- A-GEM projection constraint
- Distillation identity
- Forget arithmetic
- P x CI partition
"""

import argparse
import logging
import sys
import time
from typing import Optional


def main(
    config_path: Optional[str] = None,
    seed: int = 1,
    reservoir_trials: int = 10_000,
    verbose: bool = False,
) -> int:
    """Run every check and return the process exit code.

    Args:
        config_path: Optional YAML config whose dataset settings the split check uses.
        seed: Seed for all randomized checks.
        reservoir_trials: Monte-Carlo trials of the reservoir check.
        verbose: Show the detail line of passing checks and debug logs.

    Returns:
        0 when every check passes, 2 when any fails, 1 on a configuration error.
    """
    from ..config import ExperimentConfig
    from ..errors import ConfigError
    from .display import Display
    from .runner import SelfCheckRunner

    if verbose:
        logging.basicConfig(level=logging.DEBUG, format="  %(message)s")

    display = Display(verbose=verbose)
    display.header()

    config = None
    if config_path:
        try:
            config = ExperimentConfig.load(config_path)
        except (FileNotFoundError, ConfigError) as e:
            display.error(str(e))
            return 1
        display.info(f"Dataset settings from {config_path}")

    start = time.perf_counter()
    runner = SelfCheckRunner(config, seed=seed, reservoir_trials=reservoir_trials, display=display)
    results = runner.run()
    display.summary(results.passed, len(results.checks), time.perf_counter() - start)
    return 0 if results.ok else 2


def cli():
    """Command-line interface entry point."""
    parser = argparse.ArgumentParser(
        description="Run the c2gen oracle and property checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # All checks with default settings
  python -m c2gen.selfcheck

  # Split check against a custom dataset configuration
  python -m c2gen.selfcheck --config configs/default.yaml

  # Faster reservoir check while iterating
  python -m c2gen.selfcheck --trials 2000 -v
        """,
    )
    parser.add_argument("-c", "--config", type=str, help="Path to YAML experiment configuration")
    parser.add_argument("-s", "--seed", type=int, default=1, help="Seed (default: 1)")
    parser.add_argument(
        "--trials",
        type=int,
        default=10_000,
        help="Reservoir Monte-Carlo trials (default: 10000)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Show details and debug logs")
    args = parser.parse_args()

    sys.exit(main(args.config, args.seed, args.trials, args.verbose))


if __name__ == "__main__":
    cli()
