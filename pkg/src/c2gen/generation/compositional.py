"""Compositional instances built from primitive probes via the composition table."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

import numpy as np

from ..config import REFERENCE_COUNTS, ExperimentConfig, derive_seed, make_rng
from ..errors import InventoryError
from ..instances import TO_TOKEN, CompInstance, PrimitivePair
from ..models import ALL_COMP_TYPES, CompType, Label, compose
from .lexicon import Lexicon, build_lexicon
from .primitives import generate_primitive_nli

logger = logging.getLogger(__name__)


def default_counts(divisor: int = 24) -> Dict[CompType, int]:
    """Reference per-type counts scaled down by ``divisor`` (floor)."""
    if divisor < 1:
        raise ValueError(f"divisor must be >= 1, got {divisor}")
    return {ctype: count // divisor for ctype, count in zip(ALL_COMP_TYPES, REFERENCE_COUNTS)}


def compose_instance(lexicon: Lexicon, verb: str, nli: PrimitivePair) -> CompInstance:
    """Embed an NLI probe under "SUBJ VERB to ...".

    The compositional premise is the NLI premise with the verb inserted after
    the subject; the hypothesis is the NLI hypothesis unchanged. The veridical
    constituent is "SUBJ VERB to VP" => "SUBJ VP" over the NLI premise's VP.
    """
    if nli.kind != "nli":
        raise ValueError(f"Expected an NLI probe, got {nli.kind!r}")
    signature = lexicon.signature_of(verb)
    subject, vp = nli.premise[0], nli.premise[1:]
    premise = (subject, verb, TO_TOKEN) + vp
    ver = PrimitivePair(
        kind="veridical",
        premise=premise,
        hypothesis=nli.premise,
        gold=signature.as_label(),
        key=verb,
    )
    return CompInstance(
        premise=premise,
        hypothesis=nli.hypothesis,
        ver=ver,
        nli=nli,
        ctype=CompType(signature, nli.gold),
        gold_ci=compose(signature, nli.gold),
    )


def decompose(instance: CompInstance) -> Tuple[PrimitivePair, PrimitivePair]:
    """Return the (veridical, NLI) probes of a compositional instance."""
    return instance.ver, instance.nli


def assemble_compositional(
    lexicon: Lexicon,
    nli_pairs: List[PrimitivePair],
    counts_per_type: Mapping[CompType, int],
    rng: np.random.Generator,
) -> List[CompInstance]:
    """Build compositional instances with the requested per-type counts.

    Each instance is a distinct (verb, NLI surface) combination of its type.

    Args:
        lexicon: Source lexicon.
        nli_pairs: Pool of NLI probes.
        counts_per_type: Count for each of the nine types.
        rng: Random generator.

    Returns:
        Instances grouped by type in composition-table row order.

    Raises:
        ValueError: If counts_per_type does not name all nine types.
        InventoryError: If a type has fewer combinations than requested.
    """
    if len(counts_per_type) != 9 or set(counts_per_type) != set(ALL_COMP_TYPES):
        raise ValueError(f"counts_per_type must have 9 entries, got {len(counts_per_type)}")

    by_label: Dict[Label, List[PrimitivePair]] = {label: [] for label in Label}
    for pair in nli_pairs:
        by_label[pair.gold].append(pair)

    instances: List[CompInstance] = []
    for ctype in ALL_COMP_TYPES:
        count = int(counts_per_type[ctype])
        if count == 0:
            continue
        verbs = lexicon.verbs_with(ctype.v)
        candidates = by_label[ctype.n]
        capacity = len(verbs) * len(candidates)
        if count > capacity:
            raise InventoryError(
                f"Type {ctype.code} supports {capacity} combinations "
                f"({len(verbs)} verbs x {len(candidates)} NLI probes), {count} requested"
            )
        for flat in rng.choice(capacity, size=count, replace=False):
            verb_idx, pair_idx = divmod(int(flat), len(candidates))
            instances.append(compose_instance(lexicon, verbs[verb_idx], candidates[pair_idx]))

    logger.debug(f"Assembled {len(instances)} compositional instances")
    return instances


@dataclass
class Dataset:
    """Everything synthesized for one run seed."""

    lexicon: Lexicon
    primitives: List[PrimitivePair]
    instances: List[CompInstance]

    def histogram(self) -> Dict[CompType, int]:
        counts = {ctype: 0 for ctype in ALL_COMP_TYPES}
        for inst in self.instances:
            counts[inst.ctype] += 1
        return counts


def build_dataset(config: ExperimentConfig, seed: int) -> Dataset:
    """Lexicon, primitive probes and compositional instances for one seed."""
    lexicon = build_lexicon(config.lexicon, derive_seed(seed, "lexicon"))
    rng = make_rng(seed, "data")
    primitives = generate_primitive_nli(lexicon, config.dataset.nli_per_label, rng)
    instances = assemble_compositional(
        lexicon, primitives, config.dataset.counts_per_type(), rng
    )
    logger.info(
        f"Synthesized dataset for seed {seed}: {len(instances)} instances, "
        f"{len(lexicon.verbs)} verbs, {len(lexicon.relations)} concept pairs"
    )
    return Dataset(lexicon=lexicon, primitives=primitives, instances=instances)
