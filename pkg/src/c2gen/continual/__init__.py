"""Continual training: episodic memory, mitigation strategies and the staged trainer."""

from .memory import POLICIES, EpisodicMemory, MemoryItem, memory_update
from .strategies import agem_project, kd_loss, memory_policy, mir_scores, replay_batch
from .trainer import StageSnapshot, StepLoss, Trainer, TrainLog, consumed_digest, train_stage

__all__ = [
    "POLICIES",
    "EpisodicMemory",
    "MemoryItem",
    "StageSnapshot",
    "StepLoss",
    "TrainLog",
    "Trainer",
    "agem_project",
    "consumed_digest",
    "kd_loss",
    "memory_policy",
    "memory_update",
    "mir_scores",
    "replay_batch",
    "train_stage",
]
