"""Staged trainer: runs a stream stage by stage under one continual strategy."""

import hashlib
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np

from ..config import ModelConfig, StrategyConfig, StreamConfig, make_rng
from ..instances import CompInstance, Stage, Stream, Tokens
from ..network.model import Batch, BatchItem, Losses, loss_and_grad
from ..network.optim import AdamState, adam_step
from ..network.params import Gradient, ModelParams, dot
from .memory import EpisodicMemory, MemoryItem
from .strategies import agem_project, memory_policy, replay_batch

logger = logging.getLogger(__name__)

# Called with (params, stage name) at the end of every stage; returns accuracies
# keyed acc_v, acc_n, acc_vn, acc_ci (percentages).
EvalHook = Callable[[ModelParams, str], Dict[str, float]]

Surface = Tuple[Tokens, Tokens]


@dataclass
class StageSnapshot:
    """End-of-stage evaluation record."""

    stage: str
    acc_v: float
    acc_n: float
    acc_vn: float
    acc_ci: float
    instances: int = 0
    steps: int = 0
    mean_loss: float = 0.0
    digest: str = ""


@dataclass
class StepLoss:
    stage: str
    step: int
    total: float
    cr: float
    prim: float
    kd: float = 0.0


@dataclass
class TrainLog:
    """Per-step losses and per-stage snapshots of one training run."""

    seed: int
    losses: List[StepLoss] = field(default_factory=list)
    snapshots: List[StageSnapshot] = field(default_factory=list)
    wall_clock: float = 0.0
    agem_projections: int = 0
    agem_steps: int = 0

    def snapshot(self, stage: str) -> Optional[StageSnapshot]:
        for snap in self.snapshots:
            if snap.stage == stage:
                return snap
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "wall_clock": self.wall_clock,
            "agem_projections": self.agem_projections,
            "agem_steps": self.agem_steps,
            "snapshots": [asdict(s) for s in self.snapshots],
            "losses": [asdict(step) for step in self.losses],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainLog":
        return cls(
            seed=int(data["seed"]),
            losses=[StepLoss(**step) for step in data.get("losses", [])],
            snapshots=[StageSnapshot(**s) for s in data.get("snapshots", [])],
            wall_clock=float(data.get("wall_clock", 0.0)),
            agem_projections=int(data.get("agem_projections", 0)),
            agem_steps=int(data.get("agem_steps", 0)),
        )


def consumed_digest(instances: List[CompInstance]) -> str:
    """SHA-256 over the surfaces of ``instances`` in consumption order."""
    h = hashlib.sha256()
    for inst in instances:
        premise, hypothesis = inst.surface
        h.update(" ".join(premise).encode("utf-8"))
        h.update(b"\x1f")
        h.update(" ".join(hypothesis).encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


def stage_heads_by_surface(stage: Stage) -> Dict[Surface, FrozenSet[str]]:
    """Union of the heads of every block of ``stage`` that contains each surface."""
    heads: Dict[Surface, FrozenSet[str]] = {}
    for block in stage.blocks:
        for inst in block.instances:
            heads[inst.surface] = heads.get(inst.surface, frozenset()) | block.heads
    return heads


class Trainer:
    """Owns parameters, optimizer state and the episodic memory of one run.

    Each block of a stage is trained for ``stage.epochs`` epochs before the next
    block starts; instances are reshuffled every epoch. Every stage instance is
    offered to the memory once per stage, when it is first presented, even if
    several blocks of the stage contain it; the stored item carries every head
    the stage trains it on.

    Replay items join the incoming batch in one joint loss. Under kd they are
    distillation-only: their heads are masked out and they contribute only the
    weighted KL term against the stored teacher logits.
    """

    def __init__(
        self,
        params: ModelParams,
        model: ModelConfig,
        strategy: StrategyConfig,
        seed: int,
        stream_config: Optional[StreamConfig] = None,
        eval_hook: Optional[EvalHook] = None,
    ):
        """Initialize the trainer.

        Args:
            params: Initial parameters (their vocabulary must cover the stream).
            model: Optimizer and batch settings.
            strategy: Continual strategy and memory settings.
            seed: Run seed; shuffling and memory draw their own sub-seeds from it.
            stream_config: Stream settings (only reset_memory_before_s3 is read).
            eval_hook: Evaluation run at the end of every stage.
        """
        self.params = params
        self.model = model
        self.strategy = strategy
        self.seed = seed
        self.reset_before_s3 = bool(stream_config and stream_config.reset_memory_before_s3)
        self.eval_hook = eval_hook

        self.optimizer = AdamState.zeros(params)
        self.shuffle_rng = make_rng(seed, "shuffle")
        self.memory_rng = make_rng(seed, "memory")
        self.memory: Optional[EpisodicMemory] = None
        if strategy.uses_memory:
            self.memory = EpisodicMemory(strategy.memory_size, memory_policy(strategy.kind))
        self.log = TrainLog(seed=seed)

    @property
    def steps(self) -> int:
        return self.optimizer.step

    def _gradient(self, items: List[BatchItem]) -> Tuple[Losses, Gradient]:
        batch = Batch.from_items(self.params.vocab, items)
        return loss_and_grad(
            self.params,
            batch,
            reduction=self.model.reduction,
            kd_weight=self.strategy.kd_weight if self.strategy.kind == "kd" else 0.0,
            kd_temperature=self.strategy.kd_temperature,
        )

    def _step(self, stage: str, current: List[BatchItem]) -> float:
        kind = self.strategy.kind
        replay: List[MemoryItem] = []
        if self.memory is not None and len(self.memory) > 0:
            incoming = Batch.from_items(self.params.vocab, current)
            replay = replay_batch(
                self.memory,
                self.strategy,
                self.params,
                incoming,
                self.model.lr,
                self.memory_rng,
                batch_size=self.model.batch_size,
                reduction=self.model.reduction,
            )

        if kind == "agem":
            losses, grad = self._gradient(current)
            if replay:
                _, g_ref = self._gradient([it.as_batch_item() for it in replay])
                self.log.agem_steps += 1
                if dot(grad, g_ref) < 0:
                    self.log.agem_projections += 1
                grad = agem_project(grad, g_ref)
        else:
            extra = [
                it.as_batch_item(with_teacher=True, supervise=False) if kind == "kd" else it.as_batch_item()
                for it in replay
            ]
            losses, grad = self._gradient(current + extra)

        self.params, self.optimizer = adam_step(self.params, self.optimizer, grad, self.model.lr)
        self.log.losses.append(StepLoss(stage, self.steps, losses.total, losses.cr, losses.prim, losses.kd))
        return losses.total

    def train_stage(self, stage: Stage) -> StageSnapshot:
        """Train on one stage and record its end-of-stage snapshot.

        Raises:
            ValueError: If the stage has no instances.
        """
        if len(stage) == 0:
            raise ValueError(f"Stage {stage.name} has no instances")
        logger.info(f"Stage {stage.name}: {len(stage)} instances, {stage.epochs} epoch(s), {self.strategy.kind}")

        if self.memory is not None:
            if stage.name == "S3" and self.reset_before_s3:
                logger.info("Resetting episodic memory before S3")
                self.memory.reset()
            self.memory.begin_stage(stage.name, self.memory_rng)

        consumed: List[CompInstance] = []
        stage_losses: List[float] = []
        bs = self.model.batch_size
        stage_heads = stage_heads_by_surface(stage)
        offered: Set[Surface] = set()
        for block in stage.blocks:
            n = len(block.instances)
            if n == 0:
                continue
            for _ in range(stage.epochs):
                order = self.shuffle_rng.permutation(n) if stage.shuffle_within else np.arange(n)
                for start in range(0, n, bs):
                    chunk = [block.instances[int(i)] for i in order[start : start + bs]]
                    current = [BatchItem(inst, block.heads) for inst in chunk]
                    stage_losses.append(self._step(stage.name, current))
                    consumed.extend(chunk)
                    if self.memory is not None:
                        for inst in chunk:
                            if inst.surface in offered:
                                continue
                            offered.add(inst.surface)
                            item = MemoryItem(inst, stage.name, stage_heads[inst.surface])
                            self.memory.add(item, self.memory_rng)
            logger.debug(f"Stage {stage.name}: block {block.name} done after {self.steps} steps")

        if self.memory is not None and self.strategy.kind == "kd":
            self.memory.capture_teacher(self.params)

        accs = self.eval_hook(self.params, stage.name) if self.eval_hook else {}
        snap = StageSnapshot(
            stage=stage.name,
            acc_v=float(accs.get("acc_v", 0.0)),
            acc_n=float(accs.get("acc_n", 0.0)),
            acc_vn=float(accs.get("acc_vn", 0.0)),
            acc_ci=float(accs.get("acc_ci", 0.0)),
            instances=len(stage),
            steps=len(stage_losses),
            mean_loss=float(np.mean(stage_losses)) if stage_losses else 0.0,
            digest=consumed_digest(consumed),
        )
        self.log.snapshots.append(snap)
        logger.info(
            f"Stage {stage.name} done: loss {snap.mean_loss:.4f}, acc_v {snap.acc_v:.2f}, "
            f"acc_n {snap.acc_n:.2f}, acc_ci {snap.acc_ci:.2f}"
        )
        return snap

    def train_stream(self, stream: Stream) -> TrainLog:
        """Train on every stage of ``stream`` in order."""
        start = time.perf_counter()
        for stage in stream.stages:
            self.train_stage(stage)
        self.log.wall_clock += time.perf_counter() - start
        if self.memory is not None:
            logger.debug(f"Final memory holdings: {self.memory.stage_histogram()}")
        return self.log


def train_stage(
    params: ModelParams,
    stage: Stage,
    memory: Optional[EpisodicMemory],
    strategy: StrategyConfig,
    optimizer: AdamState,
    model: ModelConfig,
    seed: int = 0,
    eval_hook: Optional[EvalHook] = None,
):
    """Functional wrapper: train one stage from explicit state.

    Returns:
        (params', memory', optimizer', TrainLog)
    """
    trainer = Trainer(params, model, strategy, seed, eval_hook=eval_hook)
    trainer.optimizer = optimizer
    if strategy.uses_memory:
        trainer.memory = memory if memory is not None else trainer.memory
    trainer.train_stage(stage)
    return trainer.params, trainer.memory, trainer.optimizer, trainer.log
