"""Record types flowing through the data pipeline."""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Literal, Optional, Tuple, Union

from .models import CompType, FunctionType, Label, Signature, compose

Tokens = Tuple[str, ...]
PairKey = Tuple[str, str]

HEAD_V = "v"
HEAD_N = "n"
HEAD_CI = "ci"
ALL_HEADS: FrozenSet[str] = frozenset({HEAD_V, HEAD_N, HEAD_CI})
HEAD_ORDER: Tuple[str, ...] = (HEAD_V, HEAD_N, HEAD_CI)

TO_TOKEN = "to"
SEP_TOKEN = "[SEP]"


def _remap(tokens: Tokens, mapping: Dict[str, str]) -> Tokens:
    return tuple(mapping.get(t, t) for t in tokens)


@dataclass(frozen=True)
class PrimitivePair:
    """A primitive inference probe.

    Attributes:
        kind: "veridical" ("SUBJ VERB to VP" => "SUBJ VP") or "nli" (one concept slot differs).
        premise: Premise tokens.
        hypothesis: Hypothesis tokens.
        gold: Gold label.
        key: Governing lexical item: the verb token, or the ordered concept pair.
    """

    kind: Literal["veridical", "nli"]
    premise: Tokens
    hypothesis: Tokens
    gold: Label
    key: Union[str, PairKey]

    def substitute(self, mapping: Dict[str, str]) -> "PrimitivePair":
        if isinstance(self.key, tuple):
            key: Union[str, PairKey] = (
                mapping.get(self.key[0], self.key[0]),
                mapping.get(self.key[1], self.key[1]),
            )
        else:
            key = mapping.get(self.key, self.key)
        return replace(
            self,
            premise=_remap(self.premise, mapping),
            hypothesis=_remap(self.hypothesis, mapping),
            key=key,
        )


@dataclass(frozen=True)
class CompInstance:
    """One compositional sample with its two primitive constituents."""

    premise: Tokens
    hypothesis: Tokens
    ver: PrimitivePair
    nli: PrimitivePair
    ctype: CompType
    gold_ci: Label

    @property
    def verb(self) -> str:
        return str(self.ver.key)

    @property
    def pair(self) -> PairKey:
        return self.nli.key  # type: ignore[return-value]

    @property
    def surface(self) -> Tuple[Tokens, Tokens]:
        return self.premise, self.hypothesis

    def substitute(self, mapping: Dict[str, str]) -> "CompInstance":
        """Apply a token map to every surface and key, keeping all labels."""
        return replace(
            self,
            premise=_remap(self.premise, mapping),
            hypothesis=_remap(self.hypothesis, mapping),
            ver=self.ver.substitute(mapping),
            nli=self.nli.substitute(mapping),
        )

    def is_consistent(self) -> bool:
        return (
            self.gold_ci == compose(self.ctype.v, self.ctype.n)
            and self.ver.gold == Signature(self.ctype.v).as_label()
            and self.nli.gold == self.ctype.n
        )


@dataclass
class Split:
    """Nine-fold generalization split for one held-out CompType.

    ``unseen_prim_v`` and ``unseen_prim_n`` are aligned index-by-index with ``test``.
    """

    fold: CompType
    train: List[CompInstance]
    test: List[CompInstance]
    unseen_prim_v: List[PrimitivePair] = field(default_factory=list)
    unseen_prim_n: List[PrimitivePair] = field(default_factory=list)


@dataclass
class Block:
    """A contiguous, non-interleaved part of a stage.

    Attributes:
        instances: Instances presented in this block.
        heads: Heads supervised for every instance in the block.
        function: Function type when the block is a curriculum block.
        name: Short tag used in manifests and logs.
    """

    instances: List[CompInstance]
    heads: FrozenSet[str] = ALL_HEADS
    function: Optional[FunctionType] = None
    name: str = "all"


@dataclass
class Stage:
    """One stage of a training stream."""

    name: Literal["S1", "S2", "S3"]
    blocks: List[Block]
    epochs: int = 3
    shuffle_within: bool = True

    @property
    def instances(self) -> List[CompInstance]:
        return [inst for block in self.blocks for inst in block.instances]

    def __len__(self) -> int:
        return sum(len(block.instances) for block in self.blocks)


@dataclass
class Stream:
    """An ordered training schedule. Stages are consumed strictly in order."""

    stages: List[Stage]
    regime: Literal["cgen", "c2gen"] = "c2gen"
    order: Optional[str] = None

    @property
    def stage_names(self) -> List[str]:
        return [stage.name for stage in self.stages]
