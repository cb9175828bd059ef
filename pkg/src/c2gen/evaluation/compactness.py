"""Cluster tightness of learned primitive representations (mean silhouette)."""

import logging
from typing import Dict, List, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..instances import HEAD_N, HEAD_V, CompInstance, PrimitivePair
from ..network.model import hidden_states, probe_sequences
from ..network.params import ModelParams

logger = logging.getLogger(__name__)


def silhouette(points: np.ndarray, labels: Sequence[int]) -> float:
    """Mean silhouette coefficient with Euclidean distance.

    A point whose class has no other member scores 0, as does a point whose
    intra- and nearest inter-class mean distances are both 0.

    Raises:
        ValueError: If fewer than two classes are present.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    if points.shape[0] != labels.shape[0]:
        raise ValueError(f"{points.shape[0]} points but {labels.shape[0]} labels")
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("Silhouette needs at least two classes")

    dist = squareform(pdist(points, metric="euclidean"))
    scores = np.zeros(points.shape[0])
    members = {c: labels == c for c in classes}
    for i in range(points.shape[0]):
        own = members[labels[i]]
        n_own = int(own.sum())
        if n_own < 2:
            continue
        a = dist[i, own].sum() / (n_own - 1)
        b = min(dist[i, members[c]].mean() for c in classes if c != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


def compactness(params: ModelParams, probes: List[PrimitivePair], head: str) -> float:
    """Silhouette of the encoder's hidden vectors of ``probes``, grouped by gold label."""
    if head not in (HEAD_V, HEAD_N):
        raise ValueError(f"Compactness is defined for primitive heads, got {head!r}")
    hidden = hidden_states(params, probe_sequences(probes))
    return silhouette(hidden, [int(p.gold) for p in probes])


def probe_sample(instances: List[CompInstance], count: int, rng: np.random.Generator) -> List[CompInstance]:
    """Deterministic sample of up to ``count`` instances whose probes feed compactness."""
    if count >= len(instances):
        return list(instances)
    idx = np.sort(rng.choice(len(instances), size=count, replace=False))
    return [instances[int(i)] for i in idx]


def representations(params: ModelParams, instances: List[CompInstance]) -> Dict[str, np.ndarray]:
    """Hidden vectors and gold labels of the decomposed probes, keyed for an npz export."""
    ver = [i.ver for i in instances]
    nli = [i.nli for i in instances]
    return {
        "hidden_v": hidden_states(params, probe_sequences(ver)),
        "gold_v": np.array([int(p.gold) for p in ver], dtype=np.int64),
        "hidden_n": hidden_states(params, probe_sequences(nli)),
        "gold_n": np.array([int(p.gold) for p in nli], dtype=np.int64),
    }


def compactness_scores(params: ModelParams, instances: List[CompInstance]) -> Dict[str, float]:
    """Silhouette per primitive head; heads whose probes hold a single class are omitted."""
    scores = {}
    for head, probes in ((HEAD_V, [i.ver for i in instances]), (HEAD_N, [i.nli for i in instances])):
        if len({p.gold for p in probes}) < 2:
            logger.debug(f"Compactness for {head} skipped: single class")
            continue
        scores[head] = compactness(params, probes, head)
    return scores
