"""Aggregation of cell results and report emission (json, csv, md)."""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..evaluation.metrics import CSV_FIELDS, PXCI_KEYS, EvalReport
from ..evaluation.tables import PerTypeTable, per_type_table
from ..models import ALL_COMP_TYPES, CompType
from .cell import CELL_PREFIX, CellResult, load_cell

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "md")
METRICS = ("acc_v", "acc_n", "acc_vn", "acc_ci", "forget_v", "forget_n", *PXCI_KEYS)
STD_METRICS = ("acc_v", "acc_n", "acc_vn", "acc_ci", "forget_v", "forget_n")
PXCI_HEADERS = ("P✓CI✓", "P✓CI✗", "P✗CI✓", "P✗CI✗")


def _metric(report: EvalReport, name: str) -> Optional[float]:
    if name in PXCI_KEYS:
        return report.pxci.get(name)
    return getattr(report, name)


def mean_std(per_fold: Dict[str, List[float]]) -> Optional[Tuple[float, float]]:
    """Mean and population std over seeds within each fold, each then averaged over folds."""
    means, stds = [], []
    for values in per_fold.values():
        if values:
            arr = np.asarray(values, dtype=np.float64)
            means.append(float(arr.mean()))
            stds.append(float(arr.std(ddof=0)))
    if not means:
        return None
    return float(np.mean(means)), float(np.mean(stds))


@dataclass
class ResultsReport:
    """All cells of an experiment and their seed/fold aggregates."""

    cells: List[CellResult] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.cells = sorted(self.cells, key=lambda c: (c.variant, c.fold, c.seed, c.cell_id))

    @property
    def variants(self) -> List[str]:
        return sorted({c.variant for c in self.cells})

    @property
    def failed(self) -> List[CellResult]:
        return [c for c in self.cells if c.status != "ok"]

    def ok_cells(self, variant: str) -> List[CellResult]:
        return [c for c in self.cells if c.variant == variant and c.status == "ok" and c.report]

    def aggregate(self, variant: str) -> Dict[str, Dict[str, float]]:
        """Per metric: {"mean", "std"} of a variant (metrics never measured are omitted)."""
        out: Dict[str, Dict[str, float]] = {}
        cells = self.ok_cells(variant)
        for name in METRICS:
            per_fold: Dict[str, List[float]] = {}
            for cell in cells:
                value = _metric(cell.report, name)  # type: ignore[arg-type]
                if value is not None:
                    per_fold.setdefault(cell.fold, []).append(float(value))
            stats = mean_std(per_fold)
            if stats is not None:
                out[name] = {"mean": stats[0], "std": stats[1]}
        return out

    def per_type(self, variant: str) -> Optional[PerTypeTable]:
        """Seed-averaged per-type grid, or None unless all nine folds succeeded."""
        by_fold: Dict[CompType, List[EvalReport]] = {}
        for cell in self.ok_cells(variant):
            by_fold.setdefault(CompType.from_code(cell.fold), []).append(cell.report)  # type: ignore[arg-type]
        if any(ct not in by_fold for ct in ALL_COMP_TYPES):
            return None
        merged = {
            ct: EvalReport(
                fold=ct.code,
                n_test=int(round(np.mean([r.n_test for r in reps]))),
                acc_v=0.0,
                acc_n=0.0,
                acc_vn=0.0,
                acc_ci=float(np.mean([r.acc_ci for r in reps])),
            )
            for ct, reps in by_fold.items()
        }
        return per_type_table(merged)

    def to_dict(self) -> Dict[str, Any]:
        per_type = {}
        for variant in self.variants:
            table = self.per_type(variant)
            if table is not None:
                per_type[variant] = table.to_dict()
        return {
            "cells": [c.to_dict() for c in self.cells],
            "aggregates": {v: self.aggregate(v) for v in self.variants},
            "per_type": per_type,
            "failed": len(self.failed),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResultsReport":
        return cls(cells=[CellResult.from_dict(c) for c in data.get("cells", [])])

    @classmethod
    def load(cls, path: Path) -> "ResultsReport":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    @classmethod
    def collect(cls, out_dir: Path) -> "ResultsReport":
        """Gather every finished cell directory under ``out_dir``."""
        cells = []
        for cell_dir in sorted(Path(out_dir).glob(f"{CELL_PREFIX}*")):
            if not cell_dir.is_dir():
                continue
            try:
                cells.append(load_cell(cell_dir))
            except (OSError, KeyError, ValueError) as e:
                logger.warning(f"Skipping {cell_dir.name}: {e}")
        logger.info(f"Collected {len(cells)} cell(s) from {out_dir}")
        return cls(cells=cells)

    # Rendering

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        std_fields = [f"{m}_std" for m in STD_METRICS]
        fields = ["row", "variant", "cell_id", "seed", "status", *CSV_FIELDS, *std_fields]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", restval="")
        writer.writeheader()
        for cell in self.cells:
            row = {
                "row": "cell",
                "variant": cell.variant,
                "cell_id": cell.cell_id,
                "seed": cell.seed,
                "status": cell.status,
            }
            if cell.report is not None:
                row.update(cell.report.csv_row())
            else:
                row["fold"] = cell.fold
            writer.writerow(row)
        for variant in self.variants:
            agg = self.aggregate(variant)
            row = {"row": "aggregate", "variant": variant, "fold": "all", "status": "ok"}
            row["n_test"] = sum(c.report.n_test for c in self.ok_cells(variant))  # type: ignore[union-attr]
            for name, stats in agg.items():
                row[name] = f"{stats['mean']:.2f}"
                if name in STD_METRICS:
                    row[f"{name}_std"] = f"{stats['std']:.2f}"
            writer.writerow(row)
        return buf.getvalue()

    def to_markdown(self) -> str:
        def cell(agg: Dict[str, Dict[str, float]], name: str) -> str:
            if name not in agg:
                return "-"
            return f"{agg[name]['mean']:.2f}<sub>{agg[name]['std']:.2f}</sub>"

        lines = ["# Results", ""]
        lines += [
            "## Strategies",
            "",
            "| Variant | Acc_V | Acc_N | Acc_V+N | Forget_V | Forget_N | Acc_CI |",
            "|---|---|---|---|---|---|---|",
        ]
        for variant in self.variants:
            agg = self.aggregate(variant)
            cols = [cell(agg, m) for m in ("acc_v", "acc_n", "acc_vn", "forget_v", "forget_n", "acc_ci")]
            lines.append(f"| {variant} | " + " | ".join(cols) + " |")

        lines += ["", "## P x CI", "", "| Variant | " + " | ".join(PXCI_HEADERS) + " |", "|---" * 5 + "|"]
        for variant in self.variants:
            agg = self.aggregate(variant)
            lines.append(f"| {variant} | " + " | ".join(cell(agg, k) for k in PXCI_KEYS) + " |")

        curricula = [v for v in self.variants if v.endswith(("easy_hard", "hard_easy"))]
        if curricula:
            lines += ["", "## Curriculum", "", "| Variant | Acc_CI |", "|---|---|"]
            for variant in curricula:
                lines.append(f"| {variant} | {cell(self.aggregate(variant), 'acc_ci')} |")

        for variant in self.variants:
            table = self.per_type(variant)
            if table is not None:
                lines += ["", f"## Per-type CI accuracy: {variant}", "", table.to_markdown().rstrip()]

        if self.failed:
            lines += ["", "## Failed cells", ""]
            lines += [f"- {c.cell_id} ({c.variant}, {c.fold}, seed {c.seed}): {c.reason}" for c in self.failed]
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "md":
            return self.to_markdown()
        raise ValueError(f"Unknown report format {fmt!r}; expected one of {FORMATS}")


def emit_report(report: ResultsReport, fmt: str, out_dir: Path) -> Path:
    """Write ``aggregate.<fmt>`` under ``out_dir``.

    Raises:
        ValueError: If the report has no cells or the format is unknown.
        OSError: If the file cannot be written.
    """
    if not report.cells:
        raise ValueError("Cannot emit an empty report")
    text = report.render(fmt)
    path = Path(out_dir) / f"aggregate.{fmt}"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OSError(f"Cannot write report {path}: {e}") from e
    logger.info(f"Wrote {path}")
    return path
