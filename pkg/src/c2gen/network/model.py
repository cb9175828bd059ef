"""Multi-task classifier: mean-pooled embeddings, a two-layer tanh encoder and three heads.

Every head reads the same encoder. Task_CI reads the compositional pair; the
primitive heads read the decomposed probes:

    x      = encode(premise + [SEP] + hypothesis)          -> head ci
    x_v    = encode(ver.premise + [SEP] + ver.hypothesis)  -> head v
    x_n    = encode(nli.premise + [SEP] + nli.hypothesis)  -> head n

    L_cr   = sum CE(ci(x), gold_ci)
    L_prim = sum CE(v(x_v), gold_v) + CE(n(x_n), gold_n)
    L      = L_prim + L_cr (+ kd_weight * distillation on items with teacher logits)

Forward and backward passes are written out by hand; the forward pass keeps
the intermediate activations the backward pass needs.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax

from ..errors import VocabularyError
from ..instances import (
    ALL_HEADS,
    HEAD_CI,
    HEAD_N,
    HEAD_ORDER,
    HEAD_V,
    SEP_TOKEN,
    CompInstance,
    PrimitivePair,
    Tokens,
)
from ..models import Label
from .params import N_CLASSES, Gradient, ModelParams, zeros_like
from .vocab import Vocabulary

logger = logging.getLogger(__name__)

HEAD_PARAMS: Dict[str, Tuple[str, str]] = {
    HEAD_V: ("Wv", "bv"),
    HEAD_N: ("Wn", "bn"),
    HEAD_CI: ("Wc", "bc"),
}

# Sequences per forward chunk during evaluation.
EVAL_CHUNK = 512


def pair_sequence(premise: Tokens, hypothesis: Tokens) -> Tokens:
    return tuple(premise) + (SEP_TOKEN,) + tuple(hypothesis)


def head_sequence(instance: CompInstance, head: str) -> Tokens:
    """Input sequence read by ``head`` for one instance."""
    if head == HEAD_V:
        return pair_sequence(instance.ver.premise, instance.ver.hypothesis)
    if head == HEAD_N:
        return pair_sequence(instance.nli.premise, instance.nli.hypothesis)
    return pair_sequence(instance.premise, instance.hypothesis)


@dataclass
class Encoded:
    """Right-padded token ids with a validity mask."""

    ids: np.ndarray
    mask: np.ndarray
    lengths: np.ndarray

    @classmethod
    def from_sequences(cls, vocab: Vocabulary, sequences: Sequence[Tokens]) -> "Encoded":
        if not sequences:
            raise ValueError("Cannot encode an empty list of sequences")
        width = max(len(s) for s in sequences)
        ids = np.zeros((len(sequences), width), dtype=np.int64)
        mask = np.zeros((len(sequences), width))
        for i, seq in enumerate(sequences):
            if not seq:
                raise ValueError("Cannot encode an empty sequence")
            ids[i, : len(seq)] = vocab.encode(seq)
            mask[i, : len(seq)] = 1.0
        return cls(ids=ids, mask=mask, lengths=mask.sum(axis=1))


@dataclass
class BatchItem:
    """One training item: the instance, the heads it supervises and optional teacher logits.

    ``teacher`` has shape (3, 3): one row of logits per head in HEAD_ORDER.
    """

    instance: CompInstance
    heads: FrozenSet[str] = ALL_HEADS
    teacher: Optional[np.ndarray] = None


@dataclass
class Batch:
    """Encoded inputs, golds and masks for a list of BatchItems."""

    items: List[BatchItem]
    inputs: Dict[str, Encoded]
    gold: np.ndarray
    head_mask: np.ndarray
    teacher: np.ndarray
    teacher_mask: np.ndarray = field(repr=False)

    @classmethod
    def from_items(cls, vocab: Vocabulary, items: Sequence[BatchItem]) -> "Batch":
        if not items:
            raise ValueError("A batch needs at least one item")
        items = list(items)
        inputs = {
            head: Encoded.from_sequences(vocab, [head_sequence(it.instance, head) for it in items])
            for head in HEAD_ORDER
        }
        gold = np.array(
            [[it.instance.ver.gold, it.instance.nli.gold, it.instance.gold_ci] for it in items],
            dtype=np.int64,
        )
        head_mask = np.array(
            [[float(h in it.heads) for h in HEAD_ORDER] for it in items], dtype=np.float64
        )
        teacher = np.zeros((len(items), len(HEAD_ORDER), N_CLASSES))
        teacher_mask = np.zeros(len(items))
        for i, it in enumerate(items):
            if it.teacher is not None:
                teacher[i] = it.teacher
                teacher_mask[i] = 1.0
        return cls(items, inputs, gold, head_mask, teacher, teacher_mask)

    @classmethod
    def from_instances(
        cls,
        vocab: Vocabulary,
        instances: Sequence[CompInstance],
        heads: FrozenSet[str] = ALL_HEADS,
    ) -> "Batch":
        return cls.from_items(vocab, [BatchItem(inst, heads) for inst in instances])

    @property
    def instances(self) -> List[CompInstance]:
        return [it.instance for it in self.items]

    def __len__(self) -> int:
        return len(self.items)


class Losses(NamedTuple):
    total: float
    cr: float
    prim: float
    kd: float = 0.0


@dataclass
class _EncoderCache:
    enc: Encoded
    x0: np.ndarray
    h1: np.ndarray
    h: np.ndarray


def _encode(params: ModelParams, enc: Encoded) -> _EncoderCache:
    e = params["emb"][enc.ids]
    x0 = (e * enc.mask[..., None]).sum(axis=1) / enc.lengths[:, None]
    h1 = np.tanh(x0 @ params["W1"] + params["b1"])
    h = np.tanh(h1 @ params["W2"] + params["b2"])
    return _EncoderCache(enc, x0, h1, h)


def _backprop_encoder(
    params: ModelParams, cache: _EncoderCache, dh: np.ndarray, grad: Gradient
) -> None:
    da2 = dh * (1.0 - cache.h**2)
    grad["W2"] += cache.h1.T @ da2
    grad["b2"] += da2.sum(axis=0)
    da1 = (da2 @ params["W2"].T) * (1.0 - cache.h1**2)
    grad["W1"] += cache.x0.T @ da1
    grad["b1"] += da1.sum(axis=0)
    dx0 = (da1 @ params["W1"].T) / cache.enc.lengths[:, None]
    contrib = dx0[:, None, :] * cache.enc.mask[..., None]
    np.add.at(grad["emb"], cache.enc.ids, contrib)


def softened_kl(
    teacher_logits: np.ndarray, student_logits: np.ndarray, temperature: float
) -> Tuple[np.ndarray, np.ndarray]:
    """KL(softmax(t / T) || softmax(s / T)) over the last axis, and its gradient w.r.t. s."""
    if teacher_logits.shape != student_logits.shape:
        raise ValueError(
            f"Teacher/student logit shapes differ: {teacher_logits.shape} vs {student_logits.shape}"
        )
    log_qt = log_softmax(teacher_logits / temperature, axis=-1)
    log_qs = log_softmax(student_logits / temperature, axis=-1)
    qt = np.exp(log_qt)
    kl = np.sum(qt * (log_qt - log_qs), axis=-1)
    grad = (np.exp(log_qs) - qt) / temperature
    return kl, grad


def _run(
    params: ModelParams,
    batch: Batch,
    reduction: str,
    kd_weight: float,
    kd_temperature: float,
    compute_grad: bool,
) -> Tuple[Losses, Optional[Gradient], np.ndarray]:
    if reduction not in ("mean", "sum"):
        raise ValueError(f"Unknown reduction {reduction!r}")
    denom = float(len(batch)) if reduction == "mean" else 1.0
    rows = np.arange(len(batch))
    grad = zeros_like(params.tensors) if compute_grad else None
    per_instance = np.zeros(len(batch))
    cr = prim = kd = 0.0

    for j, head in enumerate(HEAD_ORDER):
        w_name, b_name = HEAD_PARAMS[head]
        weight = batch.head_mask[:, j]
        distill = batch.teacher_mask * kd_weight
        if not weight.any() and not distill.any():
            continue

        cache = _encode(params, batch.inputs[head])
        logits = cache.h @ params[w_name] + params[b_name]
        logp = log_softmax(logits, axis=1)
        ce = -logp[rows, batch.gold[:, j]]
        per_instance += weight * ce
        head_loss = float(np.sum(weight * ce) / denom)
        if head == HEAD_CI:
            cr += head_loss
        else:
            prim += head_loss

        dlogits = np.exp(logp)
        dlogits[rows, batch.gold[:, j]] -= 1.0
        dlogits *= (weight / denom)[:, None]

        if distill.any():
            kl, dkl = softened_kl(batch.teacher[:, j, :], logits, kd_temperature)
            kd += float(np.sum(distill * kl) / denom)
            dlogits += (distill / denom)[:, None] * dkl

        if grad is not None:
            grad[w_name] += cache.h.T @ dlogits
            grad[b_name] += dlogits.sum(axis=0)
            _backprop_encoder(params, cache, dlogits @ params[w_name].T, grad)

    return Losses(cr + prim + kd, cr, prim, kd), grad, per_instance


def loss(
    params: ModelParams,
    batch: Batch,
    reduction: str = "mean",
    kd_weight: float = 1.0,
    kd_temperature: float = 2.0,
) -> Losses:
    """Joint loss of a batch: (total, L_cr, L_prim, distillation term).

    Args:
        params: Model parameters.
        batch: Non-empty batch.
        reduction: "mean" divides every term by the batch size; "sum" keeps raw sums.
        kd_weight: Weight of the distillation term (items with teacher logits only).
        kd_temperature: Distillation temperature.
    """
    losses, _, _ = _run(params, batch, reduction, kd_weight, kd_temperature, compute_grad=False)
    return losses


def loss_and_grad(
    params: ModelParams,
    batch: Batch,
    reduction: str = "mean",
    kd_weight: float = 1.0,
    kd_temperature: float = 2.0,
) -> Tuple[Losses, Gradient]:
    losses, grad, _ = _run(params, batch, reduction, kd_weight, kd_temperature, compute_grad=True)
    if not np.isfinite(losses.total):
        raise FloatingPointError(f"Non-finite loss {losses.total}")
    return losses, grad  # type: ignore[return-value]


def backward(
    params: ModelParams,
    batch: Batch,
    reduction: str = "mean",
    kd_weight: float = 1.0,
    kd_temperature: float = 2.0,
) -> Gradient:
    """Exact gradient of the joint loss with respect to every parameter tensor."""
    return loss_and_grad(params, batch, reduction, kd_weight, kd_temperature)[1]


def per_instance_loss(params: ModelParams, batch: Batch) -> np.ndarray:
    """Summed cross-entropy over each item's supervised heads (no distillation)."""
    _, _, per_instance = _run(params, batch, "sum", 0.0, 1.0, compute_grad=False)
    return per_instance


def forward(
    params: ModelParams, token_ids: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Encode one id sequence and apply all three heads.

    Returns:
        (hidden, logits_v, logits_n, logits_ci)

    Raises:
        VocabularyError: If an id is outside the vocabulary.
    """
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("forward expects a non-empty 1-D id sequence")
    if ids.min() < 0 or ids.max() >= len(params.vocab):
        raise VocabularyError(f"Token id outside vocabulary of size {len(params.vocab)}")
    enc = Encoded(ids=ids[None, :], mask=np.ones((1, ids.size)), lengths=np.array([float(ids.size)]))
    h = _encode(params, enc).h
    logits = [(h @ params[w] + params[b])[0] for w, b in (HEAD_PARAMS[x] for x in HEAD_ORDER)]
    return h[0], logits[0], logits[1], logits[2]


def hidden_states(params: ModelParams, sequences: Sequence[Tokens]) -> np.ndarray:
    """Encoder output for each sequence, shape (N, hidden)."""
    out = []
    for start in range(0, len(sequences), EVAL_CHUNK):
        enc = Encoded.from_sequences(params.vocab, sequences[start : start + EVAL_CHUNK])
        out.append(_encode(params, enc).h)
    return np.vstack(out) if out else np.zeros((0, params.hidden))


def head_logits(params: ModelParams, sequences: Sequence[Tokens], head: str) -> np.ndarray:
    """Logits of one head for each sequence, shape (N, 3)."""
    w_name, b_name = HEAD_PARAMS[head]
    return hidden_states(params, sequences) @ params[w_name] + params[b_name]


def probe_sequences(probes: Sequence[PrimitivePair]) -> List[Tokens]:
    return [pair_sequence(p.premise, p.hypothesis) for p in probes]


def teacher_logits(params: ModelParams, instances: Sequence[CompInstance]) -> np.ndarray:
    """Per-head logits for distillation targets, shape (N, 3 heads, 3 classes)."""
    return np.stack(
        [head_logits(params, [head_sequence(i, h) for i in instances], h) for h in HEAD_ORDER],
        axis=1,
    )


def predict(params: ModelParams, instance: CompInstance) -> Tuple[Label, Label, Label]:
    """Argmax label per head (v on the veridical probe, n on the NLI probe, ci on the pair).

    Ties go to the lower label code.
    """
    labels = predict_batch(params, [instance])[0]
    return Label(int(labels[0])), Label(int(labels[1])), Label(int(labels[2]))


def predict_batch(params: ModelParams, instances: Sequence[CompInstance]) -> np.ndarray:
    """Predicted label codes, shape (N, 3) in HEAD_ORDER."""
    if not instances:
        return np.zeros((0, len(HEAD_ORDER)), dtype=np.int64)
    return np.argmax(teacher_logits(params, instances), axis=2)
