"""Experiment orchestration: cells, the grid runner and result reports."""

from .cell import CellResult, cell_id, load_cell, run_cell, run_cell_safe
from .grid import plan_cells, run_experiment
from .report import FORMATS, ResultsReport, emit_report, mean_std

__all__ = [
    "FORMATS",
    "CellResult",
    "ResultsReport",
    "cell_id",
    "emit_report",
    "load_cell",
    "mean_std",
    "plan_cells",
    "run_cell",
    "run_cell_safe",
    "run_experiment",
]
