"""Experiment grid: every variant x fold x seed, optionally across worker processes."""

import logging
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Tuple

from ..config import ExperimentConfig
from ..models import CompType
from .cell import CellResult, run_cell_safe
from .report import ResultsReport

logger = logging.getLogger(__name__)

CellTask = Tuple[ExperimentConfig, CompType, int, Path, bool]


def plan_cells(config: ExperimentConfig, out_dir: Path, relexicalize: bool = False) -> List[CellTask]:
    """One task per (variant, fold, seed), in a fixed order."""
    return [
        (variant, fold, seed, out_dir, relexicalize)
        for variant in config.variants()
        for fold in variant.folds
        for seed in variant.seeds
    ]


def _run_task(task: CellTask) -> CellResult:
    return run_cell_safe(*task)


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[Path] = None,
    jobs: int = 1,
    relexicalize: bool = False,
) -> ResultsReport:
    """Run every cell of ``config`` and aggregate the results.

    Failed cells are recorded in the report instead of aborting the grid.

    Args:
        config: Validated experiment configuration (with or without grid axes).
        out_dir: Output directory (defaults to config.resolve_output_dir()).
        jobs: Worker processes; 1 runs cells in this process.
        relexicalize: Also write a relexicalized evaluation per cell.

    Returns:
        The ResultsReport over all planned cells.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    out_dir = Path(out_dir) if out_dir is not None else config.resolve_output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = plan_cells(config, out_dir, relexicalize)
    logger.info(f"Running {len(tasks)} cell(s) with {jobs} job(s) into {out_dir}")

    if jobs == 1 or len(tasks) <= 1:
        results = [_run_task(task) for task in tasks]
    else:
        with Pool(min(jobs, len(tasks))) as pool:
            results = pool.map(_run_task, tasks, chunksize=1)

    report = ResultsReport(cells=results)
    if report.failed:
        logger.warning(f"{len(report.failed)} of {len(tasks)} cell(s) failed")
    return report
