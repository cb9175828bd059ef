"""Adam with bias correction."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .params import Gradient, ModelParams, Tensors, zeros_like


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the parameter tensors."""

    m: Tensors
    v: Tensors
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdamState":
        return cls(m=zeros_like(params.tensors), v=zeros_like(params.tensors))

    def resize(self, params: ModelParams) -> "AdamState":
        """Pad the embedding moments with zero rows after a vocabulary extension."""
        m, v = dict(self.m), dict(self.v)
        extra = params["emb"].shape[0] - m["emb"].shape[0]
        if extra > 0:
            pad = np.zeros((extra, m["emb"].shape[1]))
            m["emb"] = np.vstack([m["emb"], pad])
            v["emb"] = np.vstack([v["emb"], pad])
        return AdamState(m, v, self.step, self.beta1, self.beta2, self.eps)


def adam_step(
    params: ModelParams, state: AdamState, grad: Gradient, lr: float
) -> Tuple[ModelParams, AdamState]:
    """One Adam update; inputs are left untouched.

    Args:
        params: Current parameters.
        state: Current optimizer state.
        grad: Gradient of the loss.
        lr: Learning rate (> 0).

    Returns:
        (new parameters, new state)
    """
    if lr <= 0:
        raise ValueError(f"Learning rate must be > 0, got {lr}")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m, v, tensors = {}, {}, {}
    for name, value in params.tensors.items():
        g = grad[name]
        m[name] = b1 * state.m[name] + (1.0 - b1) * g
        v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = m[name] / (1.0 - b1**step)
        v_hat = v[name] / (1.0 - b2**step)
        tensors[name] = value - lr * m_hat / (np.sqrt(v_hat) + state.eps)

    return params.replace(tensors), AdamState(m, v, step, b1, b2, state.eps)
