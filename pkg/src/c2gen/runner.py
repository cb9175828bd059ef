"""Command-line entry point: generate, train, grid, report, selfcheck.

Exit codes: 0 all cells ok, 1 configuration error, 2 some cells (or checks) failed
or the data could not be generated at the configured sizes.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import ExperimentConfig, SystemConfig, make_rng
from .datasets import save_instances, save_split, save_stream
from .errors import ConfigError, CoverageError, InventoryError
from .models import CompType

logger = logging.getLogger("c2gen.runner")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(system: SystemConfig, verbose: bool = False) -> None:
    """Configure root logging once from the config's system section."""
    level = logging.DEBUG if verbose else getattr(logging, system.log_level.upper(), logging.INFO)
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if system.log_file:
        handlers.append(logging.FileHandler(system.log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Load --config (or defaults) and apply --seed / --fold overrides."""
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(config, seeds=[args.seed])
    folds = getattr(args, "fold", None)
    if folds:
        try:
            config = replace(config, folds=[CompType.from_code(code) for code in folds])
        except ValueError as e:
            raise ConfigError(f"--fold: {e}") from None
    return config


def cmd_generate(config: ExperimentConfig, out_dir: Path) -> int:
    """Write lexicon, instances, splits and streams for every seed and fold."""
    from .generation.compositional import build_dataset
    from .generation.splits import ninefold_split
    from .generation.streams import build_stream

    for seed in config.seeds:
        dataset = build_dataset(config, seed)
        seed_dir = out_dir / "data" / f"seed-{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        with open(seed_dir / "lexicon.json", "w") as f:
            json.dump(dataset.lexicon.to_dict(), f, sort_keys=True, indent=2)
        save_instances(seed_dir / "instances.jsonl", dataset.instances)
        for fold in config.folds:
            split = ninefold_split(
                dataset.instances,
                fold,
                dataset.lexicon,
                make_rng(seed, "split"),
                config.dataset.max_split_attempts,
            )
            fold_dir = seed_dir / f"fold-{fold.index}"
            save_split(fold_dir, split)
            stream = build_stream(split, dataset.lexicon, config.stream, make_rng(seed, "stream"))
            save_stream(fold_dir / "stream", stream)
        logger.info(f"Wrote data for seed {seed} to {seed_dir}")
    return EXIT_OK


def cmd_train(config: ExperimentConfig, out_dir: Path, relexicalize: bool) -> int:
    """Run the first fold x first seed of the (non-grid) config as one cell."""
    from .experiment.cell import run_cell_safe

    variant = config.variants()[0]
    result = run_cell_safe(variant, variant.folds[0], variant.seeds[0], out_dir, relexicalize)
    if result.status != "ok":
        return EXIT_FAILED
    print(json.dumps(result.report.to_dict(), sort_keys=True, indent=2))  # type: ignore[union-attr]
    return EXIT_OK


def cmd_grid(config: ExperimentConfig, out_dir: Path, formats: List[str], jobs: int, relexicalize: bool) -> int:
    from .experiment.grid import run_experiment
    from .experiment.report import emit_report
    from .selfcheck.display import Display

    report = run_experiment(config, out_dir, jobs=jobs, relexicalize=relexicalize)
    for fmt in formats:
        emit_report(report, fmt, out_dir)
    Display().cells(len(report.cells) - len(report.failed), len(report.failed))
    return EXIT_FAILED if report.failed else EXIT_OK


def cmd_report(out_dir: Path, formats: List[str]) -> int:
    from .experiment.report import ResultsReport, emit_report

    report = ResultsReport.collect(out_dir)
    if not report.cells:
        logger.error(f"No finished cells under {out_dir}")
        return EXIT_FAILED
    for fmt in formats:
        emit_report(report, fmt, out_dir)
    return EXIT_FAILED if report.failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c2gen",
        description="Continual compositional generalization lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Emit datasets, splits and streams
  c2gen generate --config configs/default.yaml --out runs/data-check

  # Train one cell (first fold, first seed of the config)
  c2gen train --config configs/c2gen_ver_nat.yaml --fold +e --seed 7

  # Full grid on four worker processes, all report formats
  c2gen grid --config configs/grid.yaml --jobs 4

  # Re-aggregate finished cells as markdown
  c2gen report --out runs --format md

  # Oracle and property checks
  c2gen selfcheck
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, folds: bool = True) -> None:
        p.add_argument("-c", "--config", type=str, help="Path to YAML experiment configuration")
        p.add_argument("-s", "--seed", type=int, help="Run with this single seed")
        p.add_argument("-o", "--out", type=str, help="Output directory (overrides $C2GEN_OUT)")
        p.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
        if folds:
            p.add_argument(
                "-f", "--fold", action="append", help="Fold code such as +e or oc (repeatable)"
            )

    def formats(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--format",
            action="append",
            choices=["json", "csv", "md"],
            help="Report format (repeatable; default: all three)",
        )

    common(sub.add_parser("generate", help="Emit datasets, splits and streams"))

    p_train = sub.add_parser("train", help="Train and evaluate one cell")
    common(p_train)
    p_train.add_argument("--relexicalize", action="store_true", help="Also evaluate on renamed data")

    p_grid = sub.add_parser("grid", help="Run every variant x fold x seed")
    common(p_grid)
    formats(p_grid)
    p_grid.add_argument("-j", "--jobs", type=int, default=1, help="Worker processes (default: 1)")
    p_grid.add_argument("--relexicalize", action="store_true", help="Relexicalized eval per cell")

    p_report = sub.add_parser("report", help="Aggregate finished cells")
    common(p_report, folds=False)
    formats(p_report)

    p_check = sub.add_parser("selfcheck", help="Run the oracle and property checks")
    p_check.add_argument("-c", "--config", type=str, help="Dataset settings for the split check")
    p_check.add_argument("-s", "--seed", type=int, default=1, help="Seed (default: 1)")
    p_check.add_argument("--trials", type=int, default=10_000, help="Reservoir trials")
    p_check.add_argument("-v", "--verbose", action="store_true", help="Show check details")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "selfcheck":
        from .selfcheck import main as selfcheck_main

        return selfcheck_main(args.config, args.seed, args.trials, args.verbose)

    try:
        config = load_config(args)
    except (FileNotFoundError, ConfigError) as e:
        logging.basicConfig(format=LOG_FORMAT)
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    setup_logging(config.system, args.verbose)
    out_dir = config.resolve_output_dir(args.out)
    fmts = getattr(args, "format", None) or ["json", "csv", "md"]

    try:
        if args.command == "generate":
            return cmd_generate(config, out_dir)
        if args.command == "train":
            return cmd_train(config, out_dir, args.relexicalize)
        if args.command == "grid":
            return cmd_grid(config, out_dir, fmts, args.jobs, args.relexicalize)
        return cmd_report(out_dir, fmts)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (InventoryError, CoverageError) as e:
        logger.error(f"Data generation failed: {type(e).__name__}: {e}")
        return EXIT_FAILED


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
