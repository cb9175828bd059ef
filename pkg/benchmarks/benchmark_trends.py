#!/usr/bin/env python3
"""Trend Benchmark for the c2gen lab.

Runs the synthetic benchmark end to end and checks the directional trends
that desk-scale runs are expected to reproduce:

  T1  forgetting exists: the primitive learned in S1 loses accuracy in S2
  T2  replay mitigates: ER-reservoir forgets less and composes better than none
  T3  continual < offline: CGen beats C2Gen (no strategy) for both orders
  T4  curriculum: easy->hard S3 is at least as good as hard->easy
  RX  relexicalization: renamed control data scores near the majority baseline

The full benchmark (3 seeds x 9 folds) takes tens of minutes on one core;
--quick shrinks the data and runs one seed on three folds.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from c2gen.config import ExperimentConfig, GridAxes
from c2gen.experiment.cell import CELL_PREFIX
from c2gen.experiment.grid import run_experiment
from c2gen.experiment.report import ResultsReport
from c2gen.models import CompType
from c2gen.selfcheck.display import Display

# Keep output clean; cell failures are still reported.
logging.basicConfig(level=logging.ERROR)

ORDERS = ("ver_nat", "nat_ver")
# Head of the primitive learned first under each order.
FIRST_PRIMITIVE = {"ver_nat": "acc_v", "nat_ver": "acc_n"}
FORGET_KEY = {"ver_nat": "forget_v", "nat_ver": "forget_n"}

MIN_DROP = 5.0
MIN_FORGET_REDUCTION = 0.5
RELEX_BAND = 5.0


def quick_config(config: ExperimentConfig) -> ExperimentConfig:
    """Smaller data and one seed on three folds."""
    return replace(
        config,
        dataset=replace(config.dataset, count_divisor=12, nli_per_label=400, compactness_probes=100),
        stream=replace(config.stream, stage_size=800, curriculum_size=800),
        folds=[CompType.from_code(code) for code in ("+e", "on", "-c")],
        seeds=[1],
    )


def stage_drop(report: ResultsReport, variant: str, order: str) -> Optional[float]:
    """Seed-averaged end-of-S1 minus end-of-S2 accuracy of the first primitive."""
    key = FIRST_PRIMITIVE[order]
    drops = []
    for cell in report.ok_cells(variant):
        snaps = {s["stage"]: s for s in cell.snapshots}
        if "S1" in snaps and "S2" in snaps:
            drops.append(snaps["S1"][key] - snaps["S2"][key])
    return float(np.mean(drops)) if drops else None


def fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def mean_of(report: ResultsReport, variant: str, metric: str) -> Optional[float]:
    stats = report.aggregate(variant).get(metric)
    return stats["mean"] if stats else None


def relex_gaps(report: ResultsReport, variant: str, out_dir: Path) -> List[float]:
    """|control acc_ci - majority| of every relexicalized cell of ``variant``."""
    gaps = []
    for cell in report.ok_cells(variant):
        path = out_dir / f"{CELL_PREFIX}{cell.cell_id}" / "eval_relex.json"
        if not path.exists():
            continue
        with open(path) as f:
            control = json.load(f)["control"]
        gaps.append(abs(control["acc_ci"] - control["majority_ci"]))
    return gaps


def check_trends(
    main: ResultsReport, curriculum: ResultsReport, out_dir: Path
) -> List[Tuple[str, bool, str]]:
    results: List[Tuple[str, bool, str]] = []

    for order in ORDERS:
        drop = stage_drop(main, f"c2gen-{order}-none", order)
        ok = drop is not None and drop >= MIN_DROP
        results.append((f"T1 forgetting exists ({order})", ok, f"S1->S2 drop {fmt(drop)}"))

    for order in ORDERS:
        none_forget = mean_of(main, f"c2gen-{order}-none", FORGET_KEY[order])
        res_forget = mean_of(main, f"c2gen-{order}-er_res", FORGET_KEY[order])
        none_ci = mean_of(main, f"c2gen-{order}-none", "acc_ci")
        res_ci = mean_of(main, f"c2gen-{order}-er_res", "acc_ci")
        ok = (
            None not in (none_forget, res_forget, none_ci, res_ci)
            and res_forget <= (1 - MIN_FORGET_REDUCTION) * none_forget  # type: ignore[operator]
            and res_ci > none_ci  # type: ignore[operator]
        )
        detail = f"forget {fmt(none_forget)} -> {fmt(res_forget)}, acc_ci {fmt(none_ci)} -> {fmt(res_ci)}"
        results.append((f"T2 replay mitigates ({order})", ok, detail))

    offline = mean_of(main, "cgen", "acc_ci")
    for order in ORDERS:
        continual = mean_of(main, f"c2gen-{order}-none", "acc_ci")
        ok = offline is not None and continual is not None and offline > continual
        gap = offline - continual if ok else None  # type: ignore[operator]
        detail = f"cgen {fmt(offline)}, c2gen {fmt(continual)}, gap {fmt(gap)}"
        results.append((f"T3 continual < offline ({order})", ok, detail))

    easy = mean_of(curriculum, "c2gen-ver_nat-er_res-easy_hard", "acc_ci")
    hard = mean_of(curriculum, "c2gen-ver_nat-er_res-hard_easy", "acc_ci")
    ok = easy is not None and hard is not None and easy >= hard
    results.append(("T4 easy->hard >= hard->easy", ok, f"easy_hard {fmt(easy)}, hard_easy {fmt(hard)}"))

    gaps = relex_gaps(main, "c2gen-ver_nat-none", out_dir / "main")
    ok = bool(gaps) and max(gaps) <= RELEX_BAND
    worst = max(gaps) if gaps else None
    detail = f"{len(gaps)} cell(s), worst gap {fmt(worst)}"
    results.append(("RX relexicalized control near majority", ok, detail))
    return results


def run_benchmark(config: ExperimentConfig, out_dir: Path, jobs: int) -> int:
    display = Display(verbose=True)
    display.header("c2gen trend benchmark")

    main_config = replace(
        config,
        grid=GridAxes(regimes=["cgen", "c2gen"], orders=list(ORDERS), strategies=["none", "er_res"]),
    )
    curriculum_config = replace(
        config,
        stream=replace(config.stream, regime="c2gen", order="ver_nat"),
        grid=GridAxes(
            regimes=["c2gen"], orders=["ver_nat"], strategies=["er_res"], curricula=["easy_hard", "hard_easy"]
        ),
    )

    display.info(f"Main grid into {out_dir / 'main'}")
    main = run_experiment(main_config, out_dir / "main", jobs=jobs, relexicalize=True)
    display.info(f"Curriculum grid into {out_dir / 'curriculum'}")
    curriculum = run_experiment(curriculum_config, out_dir / "curriculum", jobs=jobs)
    display.cells(
        len(main.cells) + len(curriculum.cells) - len(main.failed) - len(curriculum.failed),
        len(main.failed) + len(curriculum.failed),
    )

    results = check_trends(main, curriculum, out_dir)
    print()
    for name, passed, detail in results:
        display.check(name, passed, detail, 0.0)
    passed = sum(1 for _, ok, _ in results if ok)
    display.summary(passed, len(results), 0.0)
    return 0 if passed == len(results) else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Directional trend benchmark")
    parser.add_argument("-c", "--config", type=str, help="Base experiment configuration")
    parser.add_argument("-o", "--out", type=str, default="runs/trends", help="Output directory")
    parser.add_argument("-j", "--jobs", type=int, default=1, help="Worker processes")
    parser.add_argument("--quick", action="store_true", help="Small data, one seed, three folds")
    args = parser.parse_args(argv)

    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.quick:
        config = quick_config(config)
    return run_benchmark(config, Path(args.out), args.jobs)


if __name__ == "__main__":
    sys.exit(main())
