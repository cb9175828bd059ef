"""Measurement suite: accuracies, forgetting, P x CI categories, per-type grid, compactness."""

from .compactness import compactness, compactness_scores, representations, silhouette
from .metrics import (
    PXCI_KEYS,
    EvalReport,
    evaluate,
    evaluate_predictions,
    forget,
    instance_accuracies,
    majority_baseline,
    pxci_categorize,
    stage_accuracies,
)
from .tables import PerTypeTable, per_type_table

__all__ = [
    "PXCI_KEYS",
    "EvalReport",
    "PerTypeTable",
    "compactness",
    "compactness_scores",
    "evaluate",
    "evaluate_predictions",
    "forget",
    "instance_accuracies",
    "majority_baseline",
    "per_type_table",
    "pxci_categorize",
    "representations",
    "silhouette",
    "stage_accuracies",
]
