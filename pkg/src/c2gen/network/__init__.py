"""The trainable multi-task classifier, its optimizer and checkpoint format."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckResult, check_gradients
from .model import (
    Batch,
    BatchItem,
    Losses,
    backward,
    forward,
    head_logits,
    hidden_states,
    loss,
    loss_and_grad,
    per_instance_loss,
    predict,
    predict_batch,
    softened_kl,
    teacher_logits,
)
from .optim import AdamState, adam_step
from .params import ModelParams, init_params
from .vocab import Vocabulary

__all__ = [
    "AdamState",
    "Batch",
    "BatchItem",
    "Checkpoint",
    "GradCheckResult",
    "Losses",
    "ModelParams",
    "Vocabulary",
    "adam_step",
    "backward",
    "check_gradients",
    "forward",
    "head_logits",
    "hidden_states",
    "init_params",
    "load_checkpoint",
    "loss",
    "loss_and_grad",
    "per_instance_loss",
    "predict",
    "predict_batch",
    "save_checkpoint",
    "softened_kl",
    "teacher_logits",
]
