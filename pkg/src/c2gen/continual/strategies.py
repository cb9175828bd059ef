"""Replay selection, gradient projection and distillation over an episodic memory."""

import logging
from typing import List

import numpy as np

from ..config import StrategyConfig
from ..network.model import Batch, loss_and_grad, per_instance_loss, softened_kl
from ..network.params import Gradient, ModelParams, dot
from .memory import EpisodicMemory, MemoryItem

logger = logging.getLogger(__name__)

# Below this squared norm the reference gradient is treated as zero.
DEGENERATE_REF_NORM = 1e-12


def memory_policy(kind: str) -> str:
    """Memory maintenance policy of a strategy kind."""
    return "buff" if kind == "er_buff" else "res"


def mir_scores(
    params: ModelParams,
    candidates: List[MemoryItem],
    incoming: Batch,
    lr: float,
    reduction: str = "mean",
) -> np.ndarray:
    """Loss increase of each candidate under a virtual SGD step on the incoming batch.

    s_i = L(theta - lr * grad L_incoming(theta), c_i) - L(theta, c_i)
    """
    _, grad = loss_and_grad(params, incoming, reduction=reduction, kd_weight=0.0)
    virtual = params.replace({k: v - lr * grad[k] for k, v in params.tensors.items()})
    batch = Batch.from_items(params.vocab, [c.as_batch_item() for c in candidates])
    return per_instance_loss(virtual, batch) - per_instance_loss(params, batch)


def replay_batch(
    memory: EpisodicMemory,
    strategy: StrategyConfig,
    params: ModelParams,
    incoming: Batch,
    lr: float,
    rng: np.random.Generator,
    batch_size: int = 8,
    reduction: str = "mean",
) -> List[MemoryItem]:
    """Select memory items to train on alongside the incoming batch.

    er_res, er_buff, agem and kd draw ``replay_batch`` items uniformly (kd only
    from items that carry teacher logits). er_mir draws ``mir_candidates``
    uniformly and keeps the ``replay_batch`` items whose loss rises most under a
    virtual step on the incoming batch; ties go to the earlier memory index.

    Returns:
        Selected items in ascending memory order (MIR: in score order). Empty when
        the memory is empty or the strategy is "none".
    """
    if strategy.kind == "none" or len(memory) == 0:
        return []

    k = strategy.effective_replay_batch(batch_size)
    items = memory.items

    if strategy.kind == "kd":
        pool = [i for i, it in enumerate(items) if it.teacher is not None]
        if not pool:
            return []
        k = min(k, len(pool))
        chosen = np.sort(rng.choice(len(pool), size=k, replace=False))
        return [items[pool[i]] for i in chosen]

    if strategy.kind != "er_mir":
        return [items[i] for i in memory.sample(k, rng)]

    candidate_idx = memory.sample(strategy.mir_candidates, rng)
    candidates = [items[i] for i in candidate_idx]
    if len(candidates) <= k:
        return candidates
    scores = mir_scores(params, candidates, incoming, lr, reduction)
    # Primary key: descending score; secondary: ascending memory index.
    order = np.lexsort((np.array(candidate_idx), -scores))
    logger.debug(f"MIR: top score {scores[order[0]]:.4g} over {len(candidates)} candidates")
    return [candidates[i] for i in order[:k]]


def agem_project(g: Gradient, g_ref: Gradient) -> Gradient:
    """Project ``g`` so it does not increase the loss on the reference batch.

    Returns ``g`` unchanged when <g, g_ref> >= 0; otherwise
    ``g - (<g, g_ref> / <g_ref, g_ref>) g_ref``. A near-zero reference gradient
    with a negative dot product leaves ``g`` unchanged.
    """
    for name in g:
        if g[name].shape != g_ref[name].shape:
            raise ValueError(f"Gradient shapes differ for {name!r}")
    prod = dot(g, g_ref)
    if prod >= 0:
        return g
    ref_sq = dot(g_ref, g_ref)
    if ref_sq < DEGENERATE_REF_NORM:
        logger.warning(f"A-GEM: degenerate reference gradient (|g_ref|^2={ref_sq:.3g}), no projection")
        return g
    factor = prod / ref_sq
    return {name: g[name] - factor * g_ref[name] for name in g}


def kd_loss(teacher_logits: np.ndarray, student_logits: np.ndarray, temperature: float) -> float:
    """Summed KL(softmax(t / T) || softmax(s / T)) over the leading (head) axes.

    Equals the cross-entropy of the softened student against the softened
    teacher minus the teacher's entropy, so identical logits give 0.
    """
    if temperature <= 0:
        raise ValueError(f"Temperature must be > 0, got {temperature}")
    kl, _ = softened_kl(np.asarray(teacher_logits, float), np.asarray(student_logits, float), temperature)
    return float(np.sum(kl))
