"""Nine-fold generalization splits.

Each fold holds out one compositional type for testing and trains on the
remaining eight. Every verb and concept pair that appears in the test fold
must also appear somewhere in train, so the test measures recombination of
seen primitives rather than lexical novelty.
"""

import logging
from typing import List, Optional, Set, Tuple

import numpy as np

from ..errors import CoverageError, InventoryError
from ..instances import CompInstance, PairKey, PrimitivePair, Split, Tokens
from ..models import ALL_COMP_TYPES, CompType
from .compositional import compose_instance
from .lexicon import Lexicon
from .primitives import realize_nli, realize_veridical

logger = logging.getLogger(__name__)

# Re-draws per probe before a test probe is kept even though train has the same surface.
PROBE_REDRAWS = 64

Surface = Tuple[Tokens, Tokens]


def _pick(items: List, rng: np.random.Generator):
    return items[int(rng.integers(len(items)))]


def _stranded(test: List[CompInstance], verbs: Set[str], pairs: Set[PairKey]) -> List[int]:
    return [i for i, inst in enumerate(test) if inst.verb not in verbs or inst.pair not in pairs]


def _resample(
    inst: CompInstance,
    lexicon: Lexicon,
    verbs: List[str],
    pairs: List[PairKey],
    rng: np.random.Generator,
) -> CompInstance:
    """Redraw the uncovered primitives of a test instance from those seen in train."""
    verb = inst.verb if inst.verb in verbs else _pick(verbs, rng)
    pair = inst.pair if inst.pair in pairs else _pick(pairs, rng)
    nli = realize_nli(lexicon, pair, _pick(lexicon.subjects, rng), _pick(lexicon.templates, rng))
    return compose_instance(lexicon, verb, nli)


def _fresh_probe(
    probe: PrimitivePair,
    seen: Set[Surface],
    lexicon: Lexicon,
    rng: np.random.Generator,
) -> Optional[PrimitivePair]:
    """Re-realize a probe until its surface differs from every train probe."""
    if (probe.premise, probe.hypothesis) not in seen:
        return probe
    for _ in range(PROBE_REDRAWS):
        subject = _pick(lexicon.subjects, rng)
        template = _pick(lexicon.templates, rng)
        if probe.kind == "veridical":
            vp = lexicon.realize_vp(template, _pick(lexicon.concepts, rng))
            candidate = realize_veridical(lexicon, str(probe.key), subject, vp)
        else:
            candidate = realize_nli(lexicon, probe.key, subject, template)  # type: ignore[arg-type]
        if (candidate.premise, candidate.hypothesis) not in seen:
            return candidate
    return None


def ninefold_split(
    dataset: List[CompInstance],
    fold: CompType,
    lexicon: Lexicon,
    rng: np.random.Generator,
    max_attempts: int = 20,
) -> Split:
    """Hold out one compositional type.

    Test instances whose verb or concept pair never occurs in train are
    re-sampled from covered primitives of the same signature and label, for at
    most ``max_attempts`` rounds. Unseen primitive probes are then built from
    each test instance's decomposition and re-realized when train already
    contains the identical probe surface.

    Args:
        dataset: Instances covering all nine types.
        fold: The held-out type.
        lexicon: Lexicon used for re-sampling and probe realization.
        rng: Random generator.
        max_attempts: Re-sampling rounds before giving up.

    Returns:
        The Split.

    Raises:
        InventoryError: If the dataset has no instance of some type.
        CoverageError: If coverage cannot be reached within max_attempts.
    """
    present = {inst.ctype for inst in dataset}
    missing = [ct.code for ct in ALL_COMP_TYPES if ct not in present]
    if missing:
        raise InventoryError(f"Dataset does not cover all nine types, missing: {missing}")

    train = [inst for inst in dataset if inst.ctype != fold]
    test = [inst for inst in dataset if inst.ctype == fold]

    train_verbs = {inst.verb for inst in train}
    train_pairs = {inst.pair for inst in train}
    covered_verbs = sorted(v for v in lexicon.verbs_with(fold.v) if v in train_verbs)
    covered_pairs = sorted(p for p in lexicon.pairs_with(fold.n) if p in train_pairs)

    for attempt in range(max_attempts + 1):
        stranded = _stranded(test, train_verbs, train_pairs)
        if not stranded:
            break
        if attempt == max_attempts or not covered_verbs or not covered_pairs:
            raise CoverageError(
                f"Fold {fold.code}: {len(stranded)} test instance(s) still use primitives "
                f"unseen in train after {attempt} re-sampling round(s)"
            )
        logger.warning(
            f"Fold {fold.code}: re-sampling {len(stranded)} test instance(s) "
            f"(round {attempt + 1}/{max_attempts})"
        )
        surfaces = {inst.surface for inst in test}
        for i in stranded:
            candidate = _resample(test[i], lexicon, covered_verbs, covered_pairs, rng)
            if candidate.surface not in surfaces:
                surfaces.add(candidate.surface)
                test[i] = candidate

    seen: Set[Surface] = set()
    for inst in train:
        seen.add((inst.ver.premise, inst.ver.hypothesis))
        seen.add((inst.nli.premise, inst.nli.hypothesis))

    unseen_v: List[PrimitivePair] = []
    unseen_n: List[PrimitivePair] = []
    stale = 0
    for inst in test:
        for probe, out in ((inst.ver, unseen_v), (inst.nli, unseen_n)):
            fresh = _fresh_probe(probe, seen, lexicon, rng)
            if fresh is None:
                stale += 1
                fresh = probe
            out.append(fresh)
    if stale:
        logger.warning(f"Fold {fold.code}: {stale} probe(s) could not be made distinct from train")

    split = Split(fold=fold, train=train, test=test, unseen_prim_v=unseen_v, unseen_prim_n=unseen_n)
    verify_split(split)
    logger.info(f"Fold {fold.code}: {len(train)} train / {len(test)} test instances")
    return split


def verify_split(split: Split) -> None:
    """Check the held-out and coverage constraints of a split.

    Raises:
        CoverageError: On the first violated constraint.
    """
    fold = split.fold
    if not split.test:
        raise CoverageError(f"Fold {fold.code}: empty test set")
    if any(inst.ctype != fold for inst in split.test):
        raise CoverageError(f"Fold {fold.code}: test contains other types")
    if any(inst.ctype == fold for inst in split.train):
        raise CoverageError(f"Fold {fold.code}: train contains the held-out type")

    train_verbs = {inst.verb for inst in split.train}
    train_pairs = {inst.pair for inst in split.train}
    verbs = {inst.verb for inst in split.test} - train_verbs
    pairs = {inst.pair for inst in split.test} - train_pairs
    if verbs or pairs:
        raise CoverageError(
            f"Fold {fold.code}: {len(verbs)} verb(s) and {len(pairs)} pair(s) unseen in train"
        )
    if len(split.unseen_prim_v) != len(split.test) or len(split.unseen_prim_n) != len(split.test):
        raise CoverageError(f"Fold {fold.code}: probe lists are not aligned with test")
    for inst, pv, pn in zip(split.test, split.unseen_prim_v, split.unseen_prim_n):
        if pv.key != inst.verb or pv.gold != inst.ver.gold:
            raise CoverageError(f"Fold {fold.code}: veridical probe does not match its instance")
        if tuple(pn.key) != tuple(inst.pair) or pn.gold != inst.nli.gold:
            raise CoverageError(f"Fold {fold.code}: NLI probe does not match its instance")
