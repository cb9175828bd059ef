"""Training streams: offline (CGen), staged continual (C2Gen) and curriculum stages.

A C2Gen stream learns one primitive before the other. The veridical stage
uses types whose NLI constituent comes from a small fixed pool of concept
pairs, leaving the verbs free to vary; the NLI stage fixes a small verb pool
and lets the concept pairs vary. The stream order decides which stage is S1.
"""

import logging
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..config import StreamConfig
from ..errors import InventoryError
from ..instances import (
    ALL_HEADS,
    HEAD_CI,
    HEAD_N,
    HEAD_V,
    Block,
    CompInstance,
    Split,
    Stage,
    Stream,
    Tokens,
)
from ..models import CompType, FunctionType, Label, Signature
from .compositional import compose_instance
from .lexicon import Lexicon
from .primitives import realize_nli

logger = logging.getLogger(__name__)

VERIDICAL_STAGE_TYPES: Tuple[CompType, ...] = tuple(CompType.from_index(i) for i in (2, 5, 3, 9))
NLI_STAGE_TYPES: Tuple[CompType, ...] = tuple(CompType.from_index(i) for i in (4, 6, 7, 8))

CURRICULUM_ORDERS: Dict[str, Tuple[FunctionType, ...]] = {
    "easy_hard": (FunctionType.F_VN, FunctionType.F_VE, FunctionType.F_VC),
    "hard_easy": (FunctionType.F_VC, FunctionType.F_VE, FunctionType.F_VN),
}

# Surface draws per source instance before moving on to the next source.
MAX_DRAWS = 32

PRIMITIVE_HEADS: FrozenSet[str] = frozenset({HEAD_V, HEAD_N})
CI_HEADS: FrozenSet[str] = frozenset({HEAD_CI})


def _sorted_unique(items) -> list:
    return sorted(set(items))


def _draw(items: Sequence, count: int, rng: np.random.Generator) -> list:
    """Uniform draw of min(count, len(items)) distinct items, kept in input order."""
    if count >= len(items):
        return list(items)
    idx = np.sort(rng.choice(len(items), size=count, replace=False))
    return [items[i] for i in idx]


def _stage_heads(config: StreamConfig, primitive_head: str) -> FrozenSet[str]:
    if config.primitive_supervision == "focused":
        return frozenset({primitive_head, HEAD_CI})
    return ALL_HEADS


def _compose_stage(
    sources: List[CompInstance],
    lexicon: Lexicon,
    size: int,
    rng: np.random.Generator,
    pair_pool: Optional[Dict[Label, List]] = None,
    verb_pool: Optional[Dict[Signature, List[str]]] = None,
) -> List[CompInstance]:
    """Compose ``size`` distinct stage instances patterned on train sources.

    Each stage instance keeps its source's CompType. With ``pair_pool`` the
    concept pair comes from the pool and the verb from the source; with
    ``verb_pool`` the verb comes from the pool and the pair from the source.
    Subject and template are drawn fresh.
    """
    if not sources:
        raise InventoryError("No train instances of the stage's types")

    made: List[CompInstance] = []
    used: Set[Tuple[Tokens, Tokens]] = set()
    order = rng.permutation(len(sources))
    pos, added = 0, 0
    while len(made) < size:
        if pos == len(order):
            if added == 0:
                raise InventoryError(
                    f"Split too small: only {len(made)} distinct stage instances "
                    f"available, stage_size={size}"
                )
            order, pos, added = rng.permutation(len(sources)), 0, 0
        src = sources[order[pos]]
        pos += 1

        for _ in range(MAX_DRAWS):
            if pair_pool is not None:
                pool = pair_pool[src.ctype.n]
                verb, pair = src.verb, pool[int(rng.integers(len(pool)))]
            else:
                pool = verb_pool[src.ctype.v]
                verb, pair = pool[int(rng.integers(len(pool)))], src.pair
            subject = lexicon.subjects[int(rng.integers(len(lexicon.subjects)))]
            template = lexicon.templates[int(rng.integers(len(lexicon.templates)))]
            inst = compose_instance(lexicon, verb, realize_nli(lexicon, pair, subject, template))
            if inst.surface not in used:
                used.add(inst.surface)
                made.append(inst)
                added += 1
                break
    return made


def build_veridical_stage(
    split: Split, lexicon: Lexicon, config: StreamConfig, rng: np.random.Generator, name: str
) -> Stage:
    """Stage over types +n, on, +c, -c with a fixed pool of concept pairs per label."""
    sources = [inst for inst in split.train if inst.ctype in VERIDICAL_STAGE_TYPES]
    pair_pool: Dict[Label, List] = {}
    for label in sorted({inst.ctype.n for inst in sources}):
        seen = _sorted_unique(inst.pair for inst in sources if inst.ctype.n == label)
        pair_pool[label] = _draw(seen, config.ver_pairs_per_label, rng)
        if len(pair_pool[label]) < config.ver_pairs_per_label:
            logger.warning(
                f"Only {len(seen)} concept pair(s) with label {label.symbol!r} in train, "
                f"{config.ver_pairs_per_label} requested"
            )

    instances = _compose_stage(sources, lexicon, config.stage_size, rng, pair_pool=pair_pool)
    block = Block(instances, heads=_stage_heads(config, HEAD_V), name="veridical")
    logger.info(
        f"{name}: veridical stage, {len(instances)} instances, "
        f"pair pool {sum(len(p) for p in pair_pool.values())}"
    )
    return Stage(name=name, blocks=[block], epochs=config.epochs)  # type: ignore[arg-type]


def build_nli_stage(
    split: Split, lexicon: Lexicon, config: StreamConfig, rng: np.random.Generator, name: str
) -> Stage:
    """Stage over types oe, oc, -e, -n with a fixed pool of verbs per signature."""
    sources = [inst for inst in split.train if inst.ctype in NLI_STAGE_TYPES]
    verb_pool: Dict[Signature, List[str]] = {}
    for signature in sorted({inst.ctype.v for inst in sources}):
        seen = _sorted_unique(inst.verb for inst in sources if inst.ctype.v == signature)
        verb_pool[signature] = _draw(seen, config.nli_verbs_per_signature, rng)

    instances = _compose_stage(sources, lexicon, config.stage_size, rng, verb_pool=verb_pool)
    block = Block(instances, heads=_stage_heads(config, HEAD_N), name="nli")
    logger.info(
        f"{name}: NLI stage, {len(instances)} instances, "
        f"verb pool {sum(len(v) for v in verb_pool.values())}"
    )
    return Stage(name=name, blocks=[block], epochs=config.epochs)  # type: ignore[arg-type]


def build_curriculum_stage(
    split: Split,
    order: str,
    config: StreamConfig,
    rng: np.random.Generator,
    primitives_first: bool = False,
) -> Stage:
    """Build S3: compositional train data in consecutive function-type blocks.

    Args:
        split: Source split; S3 samples ``curriculum_size`` instances from its train set.
        order: "easy_hard" (f_vn, f_ve, f_vc) or "hard_easy" (f_vc, f_ve, f_vn).
        config: Stream configuration.
        rng: Random generator.
        primitives_first: Put all primitive supervision in a block before the
            function blocks, which then supervise the CI head only.

    Returns:
        The S3 stage.
    """
    if order not in CURRICULUM_ORDERS:
        raise ValueError(f"Unknown curriculum order {order!r}; expected {sorted(CURRICULUM_ORDERS)}")
    if config.curriculum_size > len(split.train):
        raise InventoryError(
            f"curriculum_size={config.curriculum_size} exceeds {len(split.train)} train instances"
        )

    idx = np.sort(rng.choice(len(split.train), size=config.curriculum_size, replace=False))
    sample = [split.train[i] for i in idx]

    blocks: List[Block] = []
    function_heads = CI_HEADS if primitives_first else ALL_HEADS
    for function in CURRICULUM_ORDERS[order]:
        members = [inst for inst in sample if inst.ctype.function is function]
        blocks.append(Block(members, heads=function_heads, function=function, name=function.value))
    if primitives_first:
        ordered = [inst for block in blocks for inst in block.instances]
        blocks.insert(0, Block(ordered, heads=PRIMITIVE_HEADS, name="primitives"))

    logger.info(
        f"S3: curriculum {order}{' (primitives first)' if primitives_first else ''}, "
        + ", ".join(f"{b.name}={len(b.instances)}" for b in blocks)
    )
    return Stage(name="S3", blocks=blocks, epochs=config.epochs)


def build_stream(
    split: Split, lexicon: Lexicon, config: StreamConfig, rng: np.random.Generator
) -> Stream:
    """Build the training stream named by ``config.regime`` and ``config.order``.

    Args:
        split: The fold's split.
        lexicon: Lexicon for composing stage instances.
        config: Stream configuration.
        rng: Random generator (usually the run's "stream" component).

    Returns:
        A Stream with one stage (cgen) or two or three stages (c2gen).

    Raises:
        InventoryError: If the split cannot fill a stage.
    """
    if config.regime == "cgen":
        if config.cgen_pool == "stages":
            ver = build_veridical_stage(split, lexicon, config, rng, "S1")
            nli = build_nli_stage(split, lexicon, config, rng, "S2")
            pool = ver.instances + nli.instances
            name = "stages"
        else:
            pool = list(split.train)
            name = "train"
        stage = Stage(name="S1", blocks=[Block(pool, name=name)], epochs=config.epochs)
        logger.info(f"CGen stream: one stage, {len(pool)} instances ({name})")
        return Stream(stages=[stage], regime="cgen", order=None)

    if config.regime != "c2gen":
        raise ValueError(f"Unknown regime {config.regime!r}")
    if config.order == "ver_nat":
        stages = [
            build_veridical_stage(split, lexicon, config, rng, "S1"),
            build_nli_stage(split, lexicon, config, rng, "S2"),
        ]
    elif config.order == "nat_ver":
        stages = [
            build_nli_stage(split, lexicon, config, rng, "S1"),
            build_veridical_stage(split, lexicon, config, rng, "S2"),
        ]
    else:
        raise ValueError(f"Unknown order {config.order!r}")

    if config.curriculum != "none":
        primitives_first = config.curriculum.startswith("prim_")
        order = config.curriculum[len("prim_"):] if primitives_first else config.curriculum
        stages.append(build_curriculum_stage(split, order, config, rng, primitives_first))

    return Stream(stages=stages, regime="c2gen", order=config.order)
