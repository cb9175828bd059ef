"""The 3 x 3 compositional accuracy grid over all nine folds."""

import csv
import io
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from ..models import ALL_COMP_TYPES, CompType, Label, Signature
from .metrics import EvalReport

ROW_NAMES = ("v_e", "v_n", "v_c")
COLUMN_NAMES = ("n_e", "n_n", "n_c")
AVG = "avg"


@dataclass
class PerTypeTable:
    """CI accuracy per (signature, NLI label) cell with row, column and overall averages.

    ``overall`` is the plain mean of the nine cells; ``weighted_overall`` weights
    each cell by its fold's test size and equals the pooled accuracy.
    """

    cells: np.ndarray
    sizes: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.cells = np.asarray(self.cells, dtype=np.float64)
        if self.cells.shape != (3, 3):
            raise ValueError(f"Per-type grid must be 3x3, got {self.cells.shape}")
        if self.sizes is not None:
            self.sizes = np.asarray(self.sizes, dtype=np.float64)
            if self.sizes.shape != (3, 3):
                raise ValueError(f"Size grid must be 3x3, got {self.sizes.shape}")

    @property
    def row_averages(self) -> np.ndarray:
        return self.cells.mean(axis=1)

    @property
    def column_averages(self) -> np.ndarray:
        return self.cells.mean(axis=0)

    @property
    def overall(self) -> float:
        return float(self.cells.mean())

    @property
    def weighted_overall(self) -> float:
        if self.sizes is None or self.sizes.sum() == 0:
            return self.overall
        return float(np.sum(self.cells * self.sizes) / self.sizes.sum())

    def cell(self, ctype: CompType) -> float:
        return float(self.cells[ctype.v, ctype.n])

    def rows(self) -> List[List[float]]:
        """4 x 4 layout: three signature rows and an average row, each with an average column."""
        out = [list(self.cells[i]) + [self.row_averages[i]] for i in range(3)]
        out.append(list(self.column_averages) + [self.overall])
        return out

    def to_dict(self) -> Dict[str, object]:
        return {
            "cells": {ct.code: self.cell(ct) for ct in ALL_COMP_TYPES},
            "row_averages": dict(zip(ROW_NAMES, map(float, self.row_averages))),
            "column_averages": dict(zip(COLUMN_NAMES, map(float, self.column_averages))),
            "overall": self.overall,
            "weighted_overall": self.weighted_overall,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["", *COLUMN_NAMES, AVG])
        for name, row in zip((*ROW_NAMES, AVG), self.rows()):
            writer.writerow([name, *(f"{x:.2f}" for x in row)])
        return buf.getvalue()

    def to_markdown(self) -> str:
        header = "| CI | " + " | ".join(f"N_{Label(i).symbol}" for i in range(3)) + " | Avg |"
        lines = [header, "|---" * 5 + "|"]
        labels = [f"V_{Signature(i).as_label().symbol}" for i in range(3)] + ["Avg"]
        for name, row in zip(labels, self.rows()):
            lines.append(f"| {name} | " + " | ".join(f"{x:.2f}" for x in row) + " |")
        return "\n".join(lines) + "\n"


def per_type_table(reports: Mapping[CompType, EvalReport]) -> PerTypeTable:
    """Assemble the grid from one report per fold.

    Raises:
        ValueError: If any of the nine folds is missing.
    """
    missing = [ct.code for ct in ALL_COMP_TYPES if ct not in reports]
    if missing:
        raise ValueError(f"Per-type table needs all nine folds; missing {', '.join(missing)}")
    cells = np.zeros((3, 3))
    sizes = np.zeros((3, 3))
    for ct in ALL_COMP_TYPES:
        cells[ct.v, ct.n] = reports[ct].acc_ci
        sizes[ct.v, ct.n] = reports[ct].n_test
    return PerTypeTable(cells, sizes)
