"""Re-run cells and compare their eval.json byte for byte.

Runs the configured cells twice: once in-process and once on a worker pool.
Every eval.json and trainlog step count must match exactly.

Usage:
    python scripts/verify_determinism.py --config configs/default.yaml --fold +e --seed 1
"""

import argparse
import logging
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from c2gen.config import ExperimentConfig
from c2gen.experiment.cell import CELL_PREFIX
from c2gen.experiment.grid import run_experiment
from c2gen.models import CompType

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logging.getLogger("c2gen").setLevel(logging.WARNING)
logger = logging.getLogger("DeterminismVerifier")


def eval_files(out_dir: Path) -> dict:
    return {
        path.parent.name[len(CELL_PREFIX) :]: path.read_bytes()
        for path in sorted(out_dir.glob(f"{CELL_PREFIX}*/eval.json"))
    }


def run_test(config: ExperimentConfig, jobs: int) -> bool:
    print("=" * 60)
    print("🧪 VERIFYING CELL DETERMINISM")
    print("=" * 60)

    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "first", Path(tmp) / "second"
        report_a = run_experiment(config, first, jobs=1)
        report_b = run_experiment(config, second, jobs=jobs)
        if report_a.failed or report_b.failed:
            for cell in report_a.failed + report_b.failed:
                logger.error(f"Cell {cell.cell_id} failed: {cell.reason}")
            return False

        a, b = eval_files(first), eval_files(second)

    if set(a) != set(b):
        logger.error(f"Cell ids differ: {sorted(set(a) ^ set(b))}")
        return False

    mismatched = [cid for cid in a if a[cid] != b[cid]]
    for cid in sorted(a):
        status = "❌ DIFFERS" if cid in mismatched else "✅ identical"
        print(f"  cell {cid}: {status}")

    print(f"\n{len(a) - len(mismatched)}/{len(a)} eval.json files byte-identical")
    return not mismatched


def main() -> int:
    parser = argparse.ArgumentParser(description="Verify byte-identical cell re-runs")
    parser.add_argument("-c", "--config", type=str, help="Experiment configuration")
    parser.add_argument("-f", "--fold", action="append", help="Fold code (repeatable)")
    parser.add_argument("-s", "--seed", type=int, help="Single seed")
    parser.add_argument("-j", "--jobs", type=int, default=2, help="Workers for the second run")
    args = parser.parse_args()

    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.fold:
        config = replace(config, folds=[CompType.from_code(code) for code in args.fold])
    if args.seed is not None:
        config = replace(config, seeds=[args.seed])

    return 0 if run_test(config, args.jobs) else 1


if __name__ == "__main__":
    sys.exit(main())
