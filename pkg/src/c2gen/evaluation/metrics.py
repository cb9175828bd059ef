"""Task accuracies, forgetting and the primitive-by-compositional breakdown."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..instances import HEAD_CI, HEAD_N, HEAD_V, CompInstance, PrimitivePair, Split
from ..network.model import head_logits, predict_batch, probe_sequences
from ..network.params import ModelParams

logger = logging.getLogger(__name__)

# Order of the four primitive x compositional categories: P correct / CI correct.
PXCI_KEYS = ("p_ok_ci_ok", "p_ok_ci_fail", "p_fail_ci_ok", "p_fail_ci_fail")
CSV_FIELDS = (
    "fold",
    "n_test",
    "acc_v",
    "acc_n",
    "acc_vn",
    "acc_ci",
    "forget_v",
    "forget_n",
    *PXCI_KEYS,
)


def pct(count: float, total: int) -> float:
    return 100.0 * float(count) / total if total else 0.0


@dataclass
class EvalReport:
    """Accuracies (percent) of one evaluation.

    Attributes:
        fold: Code of the held-out CompType.
        n_test: Number of test instances.
        acc_v: Veridical head accuracy on the unseen-combination probes.
        acc_n: NLI head accuracy on the unseen-combination probes.
        acc_vn: Both primitive predictions correct.
        acc_ci: Compositional head accuracy.
        forget_v: Forgetting of the veridical task, when measured.
        forget_n: Forgetting of the NLI task, when measured.
        pxci: The four category percentages keyed by PXCI_KEYS.
        compactness: Mean silhouette of probe representations per head.
    """

    fold: str
    n_test: int
    acc_v: float
    acc_n: float
    acc_vn: float
    acc_ci: float
    forget_v: Optional[float] = None
    forget_n: Optional[float] = None
    pxci: Dict[str, float] = field(default_factory=dict)
    compactness: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fold": self.fold,
            "n_test": self.n_test,
            "acc_v": self.acc_v,
            "acc_n": self.acc_n,
            "acc_vn": self.acc_vn,
            "acc_ci": self.acc_ci,
            "forget_v": self.forget_v,
            "forget_n": self.forget_n,
            "pxci": {k: self.pxci[k] for k in PXCI_KEYS if k in self.pxci},
            "compactness": dict(sorted(self.compactness.items())),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        return cls(
            fold=data["fold"],
            n_test=int(data["n_test"]),
            acc_v=float(data["acc_v"]),
            acc_n=float(data["acc_n"]),
            acc_vn=float(data["acc_vn"]),
            acc_ci=float(data["acc_ci"]),
            forget_v=data.get("forget_v"),
            forget_n=data.get("forget_n"),
            pxci=dict(data.get("pxci", {})),
            compactness=dict(data.get("compactness", {})),
        )

    def csv_row(self) -> Dict[str, str]:
        """Flat row with two-decimal numbers; absent values are empty strings."""
        flat: Dict[str, Any] = {**self.to_dict(), **self.pxci}
        row = {}
        for key in CSV_FIELDS:
            value = flat.get(key)
            if value is None:
                row[key] = ""
            elif isinstance(value, float):
                row[key] = f"{value:.2f}"
            else:
                row[key] = str(value)
        return row


def forget(acc_s1: float, acc_s1s2: float) -> Optional[float]:
    """Relative accuracy drop (percent) of a task learned in S1 after training on S2.

    Returns None when ``acc_s1`` is 0. Negative values mean the later stage helped.
    """
    if acc_s1 <= 0:
        return None
    return (acc_s1 - acc_s1s2) / acc_s1 * 100.0


def pxci_categorize(p_correct: np.ndarray, ci_correct: np.ndarray) -> Dict[str, float]:
    """Split instances by (both primitives correct, CI correct) into four percentages."""
    p = np.asarray(p_correct, dtype=bool)
    ci = np.asarray(ci_correct, dtype=bool)
    if p.shape != ci.shape:
        raise ValueError(f"Shape mismatch: {p.shape} vs {ci.shape}")
    total = p.size
    counts = (
        np.sum(p & ci),
        np.sum(p & ~ci),
        np.sum(~p & ci),
        np.sum(~p & ~ci),
    )
    return {key: pct(c, total) for key, c in zip(PXCI_KEYS, counts)}


def majority_baseline(labels: Sequence[int]) -> float:
    """Accuracy (percent) of always predicting the most frequent label."""
    if len(labels) == 0:
        return 0.0
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=3)
    return pct(counts.max(), len(labels))


def evaluate_predictions(
    gold: np.ndarray,
    pred: np.ndarray,
    fold: str = "",
) -> EvalReport:
    """Build a report from gold and predicted label codes.

    Args:
        gold: (N, 3) gold codes in head order v, n, ci.
        pred: (N, 3) predicted codes in the same order.
        fold: Fold code recorded in the report.

    Raises:
        ValueError: If there are no rows or the shapes differ.
    """
    gold = np.asarray(gold)
    pred = np.asarray(pred)
    if gold.shape != pred.shape or gold.ndim != 2 or gold.shape[1] != 3:
        raise ValueError(f"Expected two (N, 3) arrays, got {gold.shape} and {pred.shape}")
    n = gold.shape[0]
    if n == 0:
        raise ValueError("Cannot evaluate an empty test set")

    correct = gold == pred
    p_ok = correct[:, 0] & correct[:, 1]
    pxci = pxci_categorize(p_ok, correct[:, 2])
    return EvalReport(
        fold=fold,
        n_test=n,
        acc_v=pct(correct[:, 0].sum(), n),
        acc_n=pct(correct[:, 1].sum(), n),
        acc_vn=pct(p_ok.sum(), n),
        # CI-correct mass of the partition, so the identity is exact.
        acc_ci=pxci["p_ok_ci_ok"] + pxci["p_fail_ci_ok"],
        pxci=pxci,
    )


def _probe_predictions(params: ModelParams, probes: List[PrimitivePair], head: str) -> np.ndarray:
    return np.argmax(head_logits(params, probe_sequences(probes), head), axis=1)


def evaluate(params: ModelParams, split: Split) -> EvalReport:
    """Evaluate ``params`` on the test set of ``split``.

    The primitive heads are scored on the split's unseen-combination probes
    (aligned with the test set); the decomposed probes of each test instance
    stand in when the split carries none.

    Raises:
        ValueError: If the test set is empty.
    """
    test = split.test
    if not test:
        raise ValueError(f"Fold {split.fold.code}: empty test set")

    pred = predict_batch(params, test)
    gold = np.array([[i.ver.gold, i.nli.gold, i.gold_ci] for i in test], dtype=np.int64)

    if split.unseen_prim_v and split.unseen_prim_n:
        if len(split.unseen_prim_v) != len(test) or len(split.unseen_prim_n) != len(test):
            raise ValueError(f"Fold {split.fold.code}: probe sets are not aligned with the test set")
        pred[:, 0] = _probe_predictions(params, split.unseen_prim_v, HEAD_V)
        pred[:, 1] = _probe_predictions(params, split.unseen_prim_n, HEAD_N)
        gold[:, 0] = [p.gold for p in split.unseen_prim_v]
        gold[:, 1] = [p.gold for p in split.unseen_prim_n]

    report = evaluate_predictions(gold, pred, fold=split.fold.code)
    logger.debug(
        f"Fold {report.fold}: acc_v={report.acc_v:.2f} acc_n={report.acc_n:.2f} "
        f"acc_ci={report.acc_ci:.2f} over {report.n_test}"
    )
    return report


def stage_accuracies(params: ModelParams, split: Split) -> Dict[str, float]:
    """The four accuracies recorded in a stage snapshot."""
    report = evaluate(params, split)
    return {
        "acc_v": report.acc_v,
        "acc_n": report.acc_n,
        "acc_vn": report.acc_vn,
        "acc_ci": report.acc_ci,
    }


def instance_accuracies(params: ModelParams, instances: List[CompInstance]) -> Dict[str, float]:
    """Per-head accuracy and majority-class baseline on arbitrary instances.

    Used as the relexicalization control, where the instances carry the
    label mix of several types.
    """
    if not instances:
        raise ValueError("No instances to score")
    pred = predict_batch(params, instances)
    gold = np.array([[i.ver.gold, i.nli.gold, i.gold_ci] for i in instances], dtype=np.int64)
    out: Dict[str, float] = {"n": float(len(instances))}
    for j, head in enumerate((HEAD_V, HEAD_N, HEAD_CI)):
        out[f"acc_{head}"] = pct(np.sum(pred[:, j] == gold[:, j]), len(instances))
        out[f"majority_{head}"] = majority_baseline(gold[:, j])
    return out
