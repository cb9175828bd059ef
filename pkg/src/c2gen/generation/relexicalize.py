"""Relexicalization: swap every verb and concept for a fresh pseudo-word.

Labels, types and token positions are untouched, so a model that only
learned lexical identities should fall to chance on the renamed data.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from ..instances import CompInstance, Split
from .lexicon import Lexicon, pseudo_words

logger = logging.getLogger(__name__)


@dataclass
class Relexicalized:
    """Result of relexicalize(): renamed instances, the token map and the renamed lexicon."""

    instances: List[CompInstance]
    token_map: Dict[str, str]
    lexicon: Lexicon


def build_token_map(
    lexicon: Lexicon, seed: int, min_length: int = 4, max_length: int = 7
) -> Dict[str, str]:
    """Injective map from every verb and concept to a token unused by the lexicon."""
    rng = np.random.default_rng(seed)
    sources = [verb for verb, _ in lexicon.verbs] + list(lexicon.concepts)
    fresh = pseudo_words(rng, len(sources), min_length, max_length, exclude=lexicon.tokens())
    return dict(zip(sources, fresh))


def rename_lexicon(lexicon: Lexicon, token_map: Dict[str, str]) -> Lexicon:
    def rename(token: str) -> str:
        return token_map.get(token, token)

    return Lexicon(
        verbs=[(rename(v), sig) for v, sig in lexicon.verbs],
        concepts=[rename(c) for c in lexicon.concepts],
        relations={(rename(a), rename(b)): label for (a, b), label in lexicon.relations.items()},
        subjects=list(lexicon.subjects),
        templates=list(lexicon.templates),
        seed=lexicon.seed,
    )


def relexicalize(instances: List[CompInstance], lexicon: Lexicon, seed: int) -> Relexicalized:
    """Apply a fresh injective verb/concept renaming to a dataset.

    Args:
        instances: Instances to rename.
        lexicon: Lexicon the instances were generated from.
        seed: Seed of the renaming.

    Returns:
        Relexicalized instances, the token map, and the renamed lexicon.
    """
    token_map = build_token_map(lexicon, seed)
    renamed = [inst.substitute(token_map) for inst in instances]
    logger.info(f"Relexicalized {len(renamed)} instances ({len(token_map)} tokens renamed)")
    return Relexicalized(renamed, token_map, rename_lexicon(lexicon, token_map))


def relexicalize_split(split: Split, token_map: Dict[str, str]) -> Split:
    """Rename train, test and probe sets of a split with an existing map."""
    return Split(
        fold=split.fold,
        train=[inst.substitute(token_map) for inst in split.train],
        test=[inst.substitute(token_map) for inst in split.test],
        unseen_prim_v=[p.substitute(token_map) for p in split.unseen_prim_v],
        unseen_prim_n=[p.substitute(token_map) for p in split.unseen_prim_n],
    )
