"""c2gen - continual compositional generalization lab for inference tasks.

Synthesizes compositional inference data over a pseudo-word lexicon, trains a
small multi-head classifier through staged (continual) or shuffled (offline)
streams, and measures forgetting and compositional generalization.

Usage:
    from c2gen import ExperimentConfig, run_experiment, emit_report

    config = ExperimentConfig.load("configs/c2gen_ver_nat.yaml")
    report = run_experiment(config, jobs=2)
    emit_report(report, "md", config.resolve_output_dir())
"""

__version__ = "1.0.0"

from .config import ExperimentConfig, derive_seed, make_rng
from .continual import EpisodicMemory, Trainer, TrainLog, agem_project, kd_loss, replay_batch
from .evaluation import EvalReport, evaluate, forget, per_type_table, pxci_categorize
from .experiment import ResultsReport, emit_report, run_cell, run_experiment
from .generation import build_dataset, build_lexicon, build_stream, ninefold_split
from .instances import Block, CompInstance, PrimitivePair, Split, Stage, Stream
from .models import ALL_COMP_TYPES, CompType, FunctionType, Label, Signature, compose, function_type
from .network import ModelParams, Vocabulary, init_params, predict

__all__ = [
    "__version__",
    # Label algebra
    "ALL_COMP_TYPES",
    "CompType",
    "FunctionType",
    "Label",
    "Signature",
    "compose",
    "function_type",
    # Data
    "Block",
    "CompInstance",
    "PrimitivePair",
    "Split",
    "Stage",
    "Stream",
    "build_dataset",
    "build_lexicon",
    "build_stream",
    "ninefold_split",
    # Model
    "ModelParams",
    "Vocabulary",
    "init_params",
    "predict",
    # Continual training
    "EpisodicMemory",
    "TrainLog",
    "Trainer",
    "agem_project",
    "kd_loss",
    "replay_batch",
    # Evaluation
    "EvalReport",
    "evaluate",
    "forget",
    "per_type_table",
    "pxci_categorize",
    # Experiments
    "ExperimentConfig",
    "ResultsReport",
    "derive_seed",
    "emit_report",
    "make_rng",
    "run_cell",
    "run_experiment",
]
