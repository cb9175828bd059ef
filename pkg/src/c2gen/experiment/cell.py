"""One grid cell: a (variant, fold, seed) run from data synthesis to evaluation.

Files written to ``OUT/cell-<id>/``:
    config.json          the variant configuration plus fold and seed
    trainlog.json        per-step losses and end-of-stage snapshots
    eval.json            final EvalReport (byte-stable for a fixed config)
    checkpoint.bin       final parameters (layout in network/checkpoint.py)
    representations.npz  probe hidden vectors and golds at every stage end
    eval_relex.json      relexicalized evaluation (only with relexicalize=True)
    failure.json         status and reason, written instead of eval.json when the cell fails
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..config import ExperimentConfig, derive_seed, make_rng
from ..continual.trainer import Trainer, TrainLog
from ..evaluation.compactness import compactness_scores, probe_sample, representations
from ..evaluation.metrics import EvalReport, evaluate, forget, instance_accuracies, stage_accuracies
from ..generation.compositional import build_dataset
from ..generation.lexicon import Lexicon
from ..generation.relexicalize import build_token_map, relexicalize_split
from ..generation.splits import ninefold_split
from ..generation.streams import build_stream
from ..instances import CompInstance, Split
from ..models import CompType
from ..network.checkpoint import save_checkpoint
from ..network.params import ModelParams, init_params
from ..network.vocab import Vocabulary

logger = logging.getLogger(__name__)

CELL_PREFIX = "cell-"
FAILURE_FILE = "failure.json"


def cell_id(config: ExperimentConfig, fold: CompType, seed: int) -> str:
    """12-hex-digit identifier of a cell, stable across runs and machines."""
    echo = config.to_dict()
    for key in ("folds", "seeds", "output_dir", "grid", "system"):
        echo.pop(key, None)
    payload = json.dumps({"config": echo, "fold": fold.code, "seed": int(seed)}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def write_json(path: Path, data: Any) -> Path:
    try:
        with open(path, "w") as f:
            json.dump(data, f, sort_keys=True, indent=2)
            f.write("\n")
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e}") from e
    return path


@dataclass
class CellResult:
    """Outcome of one cell; ``report`` is None when the cell failed."""

    cell_id: str
    variant: str
    fold: str
    seed: int
    status: str = "ok"
    reason: str = ""
    report: Optional[EvalReport] = None
    snapshots: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cell_id": self.cell_id,
            "variant": self.variant,
            "fold": self.fold,
            "seed": self.seed,
            "status": self.status,
            "reason": self.reason,
            "report": self.report.to_dict() if self.report else None,
            "snapshots": self.snapshots,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CellResult":
        report = data.get("report")
        return cls(
            cell_id=data["cell_id"],
            variant=data["variant"],
            fold=data["fold"],
            seed=int(data["seed"]),
            status=data.get("status", "ok"),
            reason=data.get("reason", ""),
            report=EvalReport.from_dict(report) if report else None,
            snapshots=list(data.get("snapshots", [])),
        )


def attach_forgetting(report: EvalReport, log: TrainLog, order: Optional[str]) -> None:
    """Forget of the primitive learned in S1, measured after S2."""
    s1, s2 = log.snapshot("S1"), log.snapshot("S2")
    if s1 is None or s2 is None:
        return
    if order == "ver_nat":
        report.forget_v = forget(s1.acc_v, s2.acc_v)
    elif order == "nat_ver":
        report.forget_n = forget(s1.acc_n, s2.acc_n)


def relexicalized_eval(
    params: ModelParams,
    split: Split,
    control: List[CompInstance],
    lexicon: Lexicon,
    seed: int,
    init_scale: float,
) -> Dict[str, Any]:
    """Score the trained model on renamed test and control instances.

    The vocabulary is extended with untrained embedding rows for every new token.
    """
    token_map = build_token_map(lexicon, derive_seed(seed, "probe"))
    renamed = relexicalize_split(split, token_map)
    extended = params.extend_vocab(sorted(token_map.values()), make_rng(seed, "probe"), init_scale)
    test_report = evaluate(extended, renamed)
    control_scores = instance_accuracies(extended, [i.substitute(token_map) for i in control])
    original_scores = instance_accuracies(params, control)
    logger.info(
        f"Relexicalized control: acc_ci {control_scores['acc_ci']:.2f} vs majority "
        f"{control_scores['majority_ci']:.2f} (original lexicon {original_scores['acc_ci']:.2f})"
    )
    return {
        "test": test_report.to_dict(),
        "control": control_scores,
        "control_original": original_scores,
        "renamed_tokens": len(token_map),
    }


def run_cell(
    config: ExperimentConfig,
    fold: CompType,
    seed: int,
    out_dir: Path,
    relexicalize: bool = False,
) -> CellResult:
    """Synthesize, train, evaluate and write one cell.

    Exceptions propagate; run_cell_safe records them instead.
    """
    cid = cell_id(config, fold, seed)
    cell_dir = Path(out_dir) / f"{CELL_PREFIX}{cid}"
    cell_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"Cell {cid}: {config.variant_name}, fold {fold.code}, seed {seed}")

    dataset = build_dataset(config, seed)
    lexicon = dataset.lexicon
    split = ninefold_split(
        dataset.instances, fold, lexicon, make_rng(seed, "split"), config.dataset.max_split_attempts
    )
    stream = build_stream(split, lexicon, config.stream, make_rng(seed, "stream"))
    probes = probe_sample(split.train, config.dataset.compactness_probes, make_rng(seed, "probe"))

    vocab = Vocabulary.from_tokens(lexicon.tokens())
    params = init_params(vocab, config.model, make_rng(seed, "init"))

    stage_reps: Dict[str, np.ndarray] = {}

    def on_stage_end(current: ModelParams, stage: str) -> Dict[str, float]:
        for key, value in representations(current, probes).items():
            stage_reps[f"{stage}_{key}"] = value
        return stage_accuracies(current, split)

    trainer = Trainer(params, config.model, config.strategy, seed, config.stream, eval_hook=on_stage_end)
    log = trainer.train_stream(stream)
    params = trainer.params

    report = evaluate(params, split)
    attach_forgetting(report, log, config.stream.order)
    report.compactness = compactness_scores(params, probes)

    meta = {"cell_id": cid, "variant": config.variant_name, "fold": fold.code, "seed": int(seed)}
    write_json(cell_dir / "config.json", {**meta, "config": config.to_dict()})
    write_json(cell_dir / "trainlog.json", log.to_dict())
    write_json(cell_dir / "eval.json", {**meta, "report": report.to_dict()})
    save_checkpoint(cell_dir / "checkpoint.bin", params, seed, trainer.steps, config.to_dict())
    np.savez(cell_dir / "representations.npz", **stage_reps)
    if relexicalize:
        relex = relexicalized_eval(params, split, probes, lexicon, seed, config.model.init_scale)
        write_json(cell_dir / "eval_relex.json", {**meta, **relex})
    (cell_dir / FAILURE_FILE).unlink(missing_ok=True)

    logger.info(f"Cell {cid} done: acc_ci {report.acc_ci:.2f}, acc_vn {report.acc_vn:.2f}")
    return CellResult(
        cell_id=cid,
        variant=config.variant_name,
        fold=fold.code,
        seed=int(seed),
        report=report,
        snapshots=log.to_dict()["snapshots"],
    )


def run_cell_safe(
    config: ExperimentConfig,
    fold: CompType,
    seed: int,
    out_dir: Path,
    relexicalize: bool = False,
) -> CellResult:
    """run_cell with failures isolated into a ``failed`` result."""
    try:
        return run_cell(config, fold, seed, out_dir, relexicalize)
    except Exception as e:
        cid = cell_id(config, fold, seed)
        reason = f"{type(e).__name__}: {e}"
        logger.error(f"Cell {cid} ({config.variant_name}, fold {fold.code}, seed {seed}) failed: {reason}")
        result = CellResult(
            cell_id=cid,
            variant=config.variant_name,
            fold=fold.code,
            seed=int(seed),
            status="failed",
            reason=reason,
        )
        cell_dir = Path(out_dir) / f"{CELL_PREFIX}{cid}"
        try:
            cell_dir.mkdir(parents=True, exist_ok=True)
            write_json(cell_dir / FAILURE_FILE, result.to_dict())
        except OSError as write_error:
            logger.error(f"Cell {cid}: could not record failure: {write_error}")
        return result


def load_cell(cell_dir: Path) -> CellResult:
    """Rebuild a CellResult from the files of a finished cell directory.

    A recorded failure takes precedence over an older eval.json.

    Raises:
        FileNotFoundError: If neither a failure record nor eval.json and trainlog.json exist.
    """
    cell_dir = Path(cell_dir)
    if (cell_dir / FAILURE_FILE).exists():
        with open(cell_dir / FAILURE_FILE) as f:
            return CellResult.from_dict(json.load(f))
    with open(cell_dir / "eval.json") as f:
        ev = json.load(f)
    with open(cell_dir / "trainlog.json") as f:
        log = json.load(f)
    return CellResult(
        cell_id=ev["cell_id"],
        variant=ev["variant"],
        fold=ev["fold"],
        seed=int(ev["seed"]),
        report=EvalReport.from_dict(ev["report"]),
        snapshots=list(log.get("snapshots", [])),
    )
