"""Central finite-difference check of the analytic gradient."""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .model import Batch, loss, loss_and_grad
from .params import PARAM_NAMES, ModelParams

logger = logging.getLogger(__name__)


@dataclass
class GradCheckResult:
    """Per-coordinate comparisons, as (tensor, flat index, analytic, numeric, relative error)."""

    checks: List[Tuple[str, int, float, float, float]] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((c[4] for c in self.checks), default=0.0)

    @property
    def tensors(self) -> List[str]:
        return sorted({c[0] for c in self.checks})


def relative_error(analytic: float, numeric: float, floor: float = 1e-5) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def check_gradients(
    params: ModelParams,
    batch: Batch,
    rng: np.random.Generator,
    coords_per_tensor: int = 5,
    eps: float = 1e-4,
    **loss_kwargs,
) -> GradCheckResult:
    """Compare analytic and central-difference derivatives on random coordinates.

    Embedding coordinates are drawn from rows the batch actually uses.

    Args:
        params: Parameters to check at (not modified).
        batch: Batch defining the loss.
        rng: Random generator for coordinate selection.
        coords_per_tensor: Coordinates checked in each tensor.
        eps: Finite-difference step.
        **loss_kwargs: Forwarded to loss() (reduction, kd_weight, kd_temperature).

    Returns:
        A GradCheckResult.
    """
    _, grad = loss_and_grad(params, batch, **loss_kwargs)
    used_rows = np.unique(np.concatenate([enc.ids[enc.mask > 0] for enc in batch.inputs.values()]))
    result = GradCheckResult()

    for name in PARAM_NAMES:
        tensor = params[name]
        if name == "emb":
            rows = rng.choice(used_rows, size=coords_per_tensor)
            cols = rng.integers(0, tensor.shape[1], size=coords_per_tensor)
            flat = [int(np.ravel_multi_index((r, c), tensor.shape)) for r, c in zip(rows, cols)]
        else:
            flat = [int(i) for i in rng.integers(0, tensor.size, size=coords_per_tensor)]

        for idx in flat:
            probe = params.copy()
            view = probe[name].reshape(-1)
            original = view[idx]
            view[idx] = original + eps
            plus = loss(probe, batch, **loss_kwargs).total
            view[idx] = original - eps
            minus = loss(probe, batch, **loss_kwargs).total
            numeric = (plus - minus) / (2.0 * eps)
            analytic = float(grad[name].reshape(-1)[idx])
            result.checks.append((name, idx, analytic, numeric, relative_error(analytic, numeric)))

    logger.debug(f"Gradient check: {len(result.checks)} coordinates, max rel error {result.max_rel_error:.2e}")
    return result
