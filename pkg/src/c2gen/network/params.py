"""Parameter containers and gradient arithmetic for the multi-task classifier.

Parameters and gradients are dictionaries of float64 arrays keyed by
PARAM_NAMES; every helper below treats them as one flat vector.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..config import ModelConfig
from .vocab import Vocabulary

N_CLASSES = 3

# Embedding, two encoder layers, then the v / n / ci heads.
PARAM_NAMES: Tuple[str, ...] = ("emb", "W1", "b1", "W2", "b2", "Wv", "bv", "Wn", "bn", "Wc", "bc")

Tensors = Dict[str, np.ndarray]
Gradient = Dict[str, np.ndarray]


def param_shapes(vocab_size: int, d_emb: int, hidden: int) -> Dict[str, Tuple[int, ...]]:
    return {
        "emb": (vocab_size, d_emb),
        "W1": (d_emb, hidden),
        "b1": (hidden,),
        "W2": (hidden, hidden),
        "b2": (hidden,),
        "Wv": (hidden, N_CLASSES),
        "bv": (N_CLASSES,),
        "Wn": (hidden, N_CLASSES),
        "bn": (N_CLASSES,),
        "Wc": (hidden, N_CLASSES),
        "bc": (N_CLASSES,),
    }


@dataclass
class ModelParams:
    """Vocabulary plus every trainable tensor."""

    vocab: Vocabulary
    tensors: Tensors

    def __post_init__(self) -> None:
        missing = [name for name in PARAM_NAMES if name not in self.tensors]
        if missing:
            raise ValueError(f"Missing parameter tensors: {missing}")
        if self.tensors["emb"].shape[0] != len(self.vocab):
            raise ValueError(
                f"Embedding has {self.tensors['emb'].shape[0]} rows for a vocabulary of {len(self.vocab)}"
            )

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    @property
    def d_emb(self) -> int:
        return int(self.tensors["emb"].shape[1])

    @property
    def hidden(self) -> int:
        return int(self.tensors["W1"].shape[1])

    def copy(self) -> "ModelParams":
        return ModelParams(self.vocab, {k: v.copy() for k, v in self.tensors.items()})

    def replace(self, tensors: Tensors) -> "ModelParams":
        return ModelParams(self.vocab, tensors)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())

    def extend_vocab(
        self, tokens, rng: np.random.Generator, init_scale: float = 0.1
    ) -> "ModelParams":
        """Append freshly initialized embedding rows for unseen tokens."""
        vocab = self.vocab.extend(tokens)
        extra = len(vocab) - len(self.vocab)
        rows = rng.uniform(-init_scale, init_scale, size=(extra, self.d_emb))
        tensors = {k: v.copy() for k, v in self.tensors.items()}
        tensors["emb"] = np.vstack([tensors["emb"], rows])
        return ModelParams(vocab, tensors)


def init_params(vocab: Vocabulary, config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Weights uniform in [-init_scale, init_scale], biases zero."""
    tensors: Tensors = {}
    for name, shape in param_shapes(len(vocab), config.d_emb, config.hidden).items():
        if name.startswith("b"):
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.uniform(-config.init_scale, config.init_scale, size=shape)
    return ModelParams(vocab, tensors)


def zeros_like(tensors: Tensors) -> Gradient:
    return {k: np.zeros_like(v) for k, v in tensors.items()}


def add(a: Gradient, b: Gradient) -> Gradient:
    return {k: a[k] + b[k] for k in a}


def scale(a: Gradient, factor: float) -> Gradient:
    return {k: a[k] * factor for k in a}


def dot(a: Gradient, b: Gradient) -> float:
    if set(a) != set(b):
        raise ValueError("Gradient keys differ")
    return float(sum(np.vdot(a[k], b[k]) for k in PARAM_NAMES if k in a))


def norm(a: Gradient) -> float:
    return float(np.sqrt(dot(a, a)))


def flatten(a: Gradient) -> np.ndarray:
    return np.concatenate([a[k].ravel() for k in PARAM_NAMES if k in a])
