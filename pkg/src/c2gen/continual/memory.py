"""Fixed-capacity episodic memory for replay, projection and distillation."""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional

import numpy as np

from ..instances import ALL_HEADS, CompInstance
from ..network.model import BatchItem, teacher_logits
from ..network.params import ModelParams

logger = logging.getLogger(__name__)

POLICIES = ("res", "buff")


@dataclass
class MemoryItem:
    """A stored training item.

    Attributes:
        instance: The compositional instance.
        stage: Name of the stage the item was seen in.
        heads: Heads the item supervised when it was seen.
        teacher: Per-head logits (3 x 3) from the last completed stage's parameters,
            or None while the item's own stage is still running.
    """

    instance: CompInstance
    stage: str
    heads: FrozenSet[str] = ALL_HEADS
    teacher: Optional[np.ndarray] = None

    def as_batch_item(self, with_teacher: bool = False, supervise: bool = True) -> BatchItem:
        return BatchItem(
            instance=self.instance,
            heads=self.heads if supervise else frozenset(),
            teacher=self.teacher if with_teacher else None,
        )


@dataclass
class EpisodicMemory:
    """Reservoir memory with an optional per-stage quota.

    Policy "res" is classic reservoir sampling over the whole stream. Policy
    "buff" gives each stage begun so far an equal quota of
    ``capacity // stages``; reservoir sampling runs within the current stage's
    quota and earlier stages are down-sampled when a new stage begins.
    """

    capacity: int = 100
    policy: str = "res"
    _items: List[MemoryItem] = field(default_factory=list)
    seen_total: int = 0
    seen_per_stage: Dict[str, int] = field(default_factory=dict)
    stages: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"Memory capacity must be >= 1, got {self.capacity}")
        if self.policy not in POLICIES:
            raise ValueError(f"Unknown memory policy {self.policy!r}; expected {POLICIES}")

    @property
    def items(self) -> List[MemoryItem]:
        """Stored items (read-only copy)."""
        return list(self._items)

    @property
    def current_stage(self) -> Optional[str]:
        return self.stages[-1] if self.stages else None

    @property
    def quota(self) -> int:
        if self.policy == "res" or not self.stages:
            return self.capacity
        return self.capacity // len(self.stages)

    def begin_stage(self, stage: str, rng: np.random.Generator) -> None:
        """Register a new stage; under "buff" shrink earlier holdings to the new quota."""
        if stage in self.stages:
            raise ValueError(f"Stage {stage!r} already began")
        self.stages.append(stage)
        self.seen_per_stage[stage] = 0
        if self.policy != "buff":
            return

        quota = self.quota
        kept: List[MemoryItem] = []
        for earlier in self.stages[:-1]:
            holdings = [it for it in self._items if it.stage == earlier]
            if len(holdings) > quota:
                keep = np.sort(rng.choice(len(holdings), size=quota, replace=False))
                holdings = [holdings[i] for i in keep]
            kept.extend(holdings)
        dropped = len(self._items) - len(kept)
        self._items = kept
        if dropped:
            logger.debug(f"Memory quota now {quota} per stage; dropped {dropped} item(s)")

    def add(self, item: MemoryItem, rng: np.random.Generator) -> None:
        """Offer one item to the memory (see memory_update)."""
        if item.stage != self.current_stage:
            raise ValueError(f"Item from stage {item.stage!r} offered during {self.current_stage!r}")
        self.seen_total += 1
        self.seen_per_stage[item.stage] += 1

        if self.policy == "res":
            if len(self._items) < self.capacity:
                self._items.append(item)
            else:
                j = int(rng.integers(0, self.seen_total))
                if j < self.capacity:
                    self._items[j] = item
        else:
            slots = [i for i, it in enumerate(self._items) if it.stage == item.stage]
            quota = self.quota
            if len(slots) < quota:
                self._items.append(item)
            else:
                j = int(rng.integers(0, self.seen_per_stage[item.stage]))
                if j < quota:
                    self._items[slots[j]] = item

        if len(self._items) > self.capacity:
            raise RuntimeError(f"Memory overflow: {len(self._items)} > {self.capacity}")

    def sample(self, count: int, rng: np.random.Generator) -> List[int]:
        """Indices of min(count, len) items drawn uniformly without replacement, ascending."""
        k = min(count, len(self._items))
        if k == 0:
            return []
        return [int(i) for i in np.sort(rng.choice(len(self._items), size=k, replace=False))]

    def capture_teacher(self, params: ModelParams) -> None:
        """Store per-head logits of ``params`` on every item."""
        if not self._items:
            return
        logits = teacher_logits(params, [it.instance for it in self._items])
        for item, row in zip(self._items, logits):
            item.teacher = row
        logger.debug(f"Captured teacher logits for {len(self._items)} memory item(s)")

    def clear(self) -> None:
        self._items.clear()

    def reset(self) -> None:
        """Forget every item, stage and counter."""
        self._items.clear()
        self.seen_total = 0
        self.seen_per_stage.clear()
        self.stages.clear()

    def stage_histogram(self) -> Dict[str, int]:
        counts = {stage: 0 for stage in self.stages}
        for it in self._items:
            counts[it.stage] = counts.get(it.stage, 0) + 1
        return counts

    def __getitem__(self, index: int) -> MemoryItem:
        return self._items[index]

    def __len__(self) -> int:
        return len(self._items)


def memory_update(
    memory: EpisodicMemory, item: MemoryItem, policy: str, rng: np.random.Generator
) -> EpisodicMemory:
    """Offer ``item`` to ``memory`` under ``policy`` ("res" or "buff") and return the memory.

    The memory is updated in place; a policy differing from the memory's own is an error.
    """
    if policy != memory.policy:
        raise ValueError(f"Memory uses policy {memory.policy!r}, got {policy!r}")
    memory.add(item, rng)
    return memory
