"""Primitive inference probes: veridical and lexical-relation (NLI) pairs."""

import logging
from typing import List

import numpy as np

from ..errors import InventoryError
from ..instances import TO_TOKEN, PairKey, PrimitivePair, Tokens
from ..models import Label
from .lexicon import Lexicon

logger = logging.getLogger(__name__)


def realize_nli(lexicon: Lexicon, pair: PairKey, subject: str, template: Tokens) -> PrimitivePair:
    """Surface an NLI probe whose premise and hypothesis differ only in the concept slot."""
    premise = (subject,) + lexicon.realize_vp(template, pair[0])
    hypothesis = (subject,) + lexicon.realize_vp(template, pair[1])
    return PrimitivePair(
        kind="nli",
        premise=premise,
        hypothesis=hypothesis,
        gold=lexicon.label_of(pair),
        key=(pair[0], pair[1]),
    )


def realize_veridical(lexicon: Lexicon, verb: str, subject: str, vp: Tokens) -> PrimitivePair:
    """Surface the probe "SUBJ VERB to VP" => "SUBJ VP"."""
    return PrimitivePair(
        kind="veridical",
        premise=(subject, verb, TO_TOKEN) + tuple(vp),
        hypothesis=(subject,) + tuple(vp),
        gold=lexicon.signature_of(verb).as_label(),
        key=verb,
    )


def surface_capacity(lexicon: Lexicon, label: Label) -> int:
    """Distinct NLI surfaces the lexicon can realize for one label."""
    return len(lexicon.pairs_with(label)) * len(lexicon.subjects) * len(lexicon.templates)


def generate_primitive_nli(
    lexicon: Lexicon, count_per_label: int, rng: np.random.Generator
) -> List[PrimitivePair]:
    """Generate distinct NLI probes, ``count_per_label`` for each label.

    Surfaces are drawn without replacement from the (pair, subject, template)
    grid of each label. Pairs whose premise equals the hypothesis are never
    emitted.

    Args:
        lexicon: Source lexicon.
        count_per_label: Probes per label.
        rng: Random generator.

    Returns:
        Probes grouped by label in E, N, C order.

    Raises:
        ValueError: If count_per_label < 1.
        InventoryError: If a label has fewer distinct surfaces than requested.
    """
    if count_per_label < 1:
        raise ValueError(f"count_per_label must be >= 1, got {count_per_label}")

    n_subj, n_tmpl = len(lexicon.subjects), len(lexicon.templates)
    probes: List[PrimitivePair] = []
    for label in Label:
        pairs = lexicon.pairs_with(label)
        capacity = surface_capacity(lexicon, label)
        if count_per_label > capacity:
            raise InventoryError(
                f"Label {label.symbol!r} supports {capacity} distinct surfaces "
                f"({len(pairs)} pairs x {n_subj} subjects x {n_tmpl} templates), "
                f"{count_per_label} requested"
            )

        made = 0
        for flat in rng.permutation(capacity):
            pair_idx, rest = divmod(int(flat), n_subj * n_tmpl)
            subj_idx, tmpl_idx = divmod(rest, n_tmpl)
            probe = realize_nli(
                lexicon, pairs[pair_idx], lexicon.subjects[subj_idx], lexicon.templates[tmpl_idx]
            )
            if probe.premise == probe.hypothesis:
                continue
            probes.append(probe)
            made += 1
            if made == count_per_label:
                break

        if made < count_per_label:
            raise InventoryError(
                f"Only {made} non-degenerate surfaces for label {label.symbol!r}, "
                f"{count_per_label} requested"
            )

    logger.debug(f"Generated {len(probes)} primitive NLI probes ({count_per_label} per label)")
    return probes
