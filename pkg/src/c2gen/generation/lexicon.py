"""Synthetic pseudo-word lexicon.

Every knowledge-bearing token (verbs, concepts, subjects, verb-phrase
templates) is a random lowercase string, so no label can leak from prior
knowledge of the surface form.
"""

import logging
import string
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Set, Tuple

import numpy as np

from ..config import LexiconConfig
from ..errors import InventoryError
from ..instances import SEP_TOKEN, TO_TOKEN, PairKey, Tokens
from ..models import Label, Signature

logger = logging.getLogger(__name__)

ALPHABET = string.ascii_lowercase

# Placeholder for the concept inside a verb-phrase template.
CONCEPT_SLOT = "<concept>"

# Tokens with a fixed role in every lexicon.
RESERVED_TOKENS = frozenset({TO_TOKEN, SEP_TOKEN, CONCEPT_SLOT})


def pseudo_words(
    rng: np.random.Generator,
    count: int,
    min_length: int = 4,
    max_length: int = 7,
    exclude: Iterable[str] = (),
) -> List[str]:
    """Draw ``count`` distinct random lowercase words.

    Args:
        rng: Random generator.
        count: Number of words.
        min_length: Shortest word.
        max_length: Longest word.
        exclude: Words that must not be produced.

    Returns:
        Distinct words in draw order.
    """
    if min_length < 1 or max_length < min_length:
        raise ValueError(f"Invalid token length range [{min_length}, {max_length}]")

    taken: Set[str] = set(exclude) | RESERVED_TOKENS
    words: List[str] = []
    letters = np.array(list(ALPHABET))
    while len(words) < count:
        length = int(rng.integers(min_length, max_length + 1))
        word = "".join(rng.choice(letters, size=length))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


def collision_probability(n_tokens: int, min_length: int = 4, max_length: int = 7) -> float:
    """Upper bound on the chance that two independent lexicons share any token.

    Each token of one lexicon matches a given token of the other with probability
    ``sum_L P(len=L)^2 / 26^L``; a union bound over the ``n_tokens^2`` pairs gives
    the returned value.
    """
    lengths = range(min_length, max_length + 1)
    p_len = 1.0 / len(lengths)
    per_pair = sum(p_len * p_len / float(len(ALPHABET)) ** length for length in lengths)
    return min(1.0, n_tokens * n_tokens * per_pair)


@dataclass
class Lexicon:
    """Token inventories and the lexical relation graph.

    Attributes:
        verbs: (token, signature) pairs.
        concepts: Concept tokens.
        relations: Ordered concept pair -> label (premise concept, hypothesis concept).
        subjects: Subject tokens.
        templates: Verb-phrase templates, each a token tuple with one CONCEPT_SLOT.
        seed: Seed the lexicon was built from.
    """

    verbs: List[Tuple[str, Signature]]
    concepts: List[str]
    relations: Dict[PairKey, Label]
    subjects: List[str]
    templates: List[Tokens]
    seed: int = 0
    _signatures: Dict[str, Signature] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._signatures = dict(self.verbs)

    def signature_of(self, verb: str) -> Signature:
        try:
            return self._signatures[verb]
        except KeyError:
            raise KeyError(f"Unknown verb token: {verb!r}") from None

    def verbs_with(self, signature: Signature) -> List[str]:
        return [token for token, sig in self.verbs if sig == signature]

    def pairs_with(self, label: Label) -> List[PairKey]:
        return [pair for pair, gold in self.relations.items() if gold == label]

    def label_of(self, pair: PairKey) -> Label:
        try:
            return self.relations[tuple(pair)]  # type: ignore[index]
        except KeyError:
            raise KeyError(f"No relation for concept pair {pair!r}") from None

    def realize_vp(self, template: Tokens, concept: str) -> Tokens:
        """Fill the concept slot of a template."""
        return tuple(concept if t == CONCEPT_SLOT else t for t in template)

    @property
    def template_tokens(self) -> List[str]:
        return sorted({t for template in self.templates for t in template if t != CONCEPT_SLOT})

    def tokens(self) -> List[str]:
        """Every surface token the lexicon can produce, function tokens included."""
        return (
            [TO_TOKEN, SEP_TOKEN]
            + self.subjects
            + [v for v, _ in self.verbs]
            + self.concepts
            + self.template_tokens
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "verbs": [[token, sig.symbol] for token, sig in self.verbs],
            "concepts": list(self.concepts),
            "relations": [[a, b, label.symbol] for (a, b), label in self.relations.items()],
            "subjects": list(self.subjects),
            "templates": [list(t) for t in self.templates],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Lexicon":
        return cls(
            verbs=[(token, Signature.from_symbol(sym)) for token, sym in data["verbs"]],
            concepts=list(data["concepts"]),
            relations={(a, b): Label.from_symbol(sym) for a, b, sym in data["relations"]},
            subjects=list(data["subjects"]),
            templates=[tuple(t) for t in data["templates"]],
            seed=int(data.get("seed", 0)),
        )


def build_lexicon(config: LexiconConfig, seed: int) -> Lexicon:
    """Build a deterministic pseudo-word lexicon.

    Concepts are partitioned so that no concept takes part in two relations;
    each label receives ``pairs_per_label`` pairs. Entailment pairs run in the
    hyponym -> hypernym direction only, so the unordered pair already fixes
    the label.

    Args:
        config: Inventory sizes.
        seed: Lexicon seed (usually ``derive_seed(run_seed, "lexicon")``).

    Returns:
        The Lexicon.

    Raises:
        ValueError: If a signature has fewer than 2 verbs or there are fewer than 10 concepts.
        InventoryError: If the relation demand exceeds the concept inventory.
    """
    counts = config.verb_counts()
    short = [sig.symbol for sig, n in counts.items() if n < 2]
    if short:
        raise ValueError(f"Need at least 2 verbs per signature, short: {short}")
    if config.concepts < 10:
        raise ValueError(f"Need at least 10 concepts, got {config.concepts}")
    demand = 2 * len(Label) * config.pairs_per_label
    if demand > config.concepts:
        raise InventoryError(
            f"{config.pairs_per_label} pairs per label need {demand} concepts, "
            f"only {config.concepts} configured"
        )
    if config.subjects < 1 or config.templates < 1:
        raise ValueError("Need at least one subject and one template")

    rng = np.random.default_rng(seed)
    lo, hi = config.min_token_length, config.max_token_length

    n_verbs = sum(counts.values())
    # Templates use one or two fixed tokens around the concept slot.
    template_sizes = rng.integers(1, 3, size=config.templates)
    total = n_verbs + config.concepts + config.subjects + int(template_sizes.sum())
    words = iter(pseudo_words(rng, total, lo, hi))

    verbs = [(next(words), sig) for sig in Signature for _ in range(counts[sig])]
    concepts = [next(words) for _ in range(config.concepts)]
    subjects = [next(words) for _ in range(config.subjects)]

    templates: List[Tokens] = []
    for size in template_sizes:
        tokens = [next(words) for _ in range(int(size))]
        slot = int(rng.integers(0, len(tokens) + 1))
        tokens.insert(slot, CONCEPT_SLOT)
        templates.append(tuple(tokens))

    order = rng.permutation(len(concepts))
    relations: Dict[PairKey, Label] = {}
    cursor = 0
    for label in Label:
        for _ in range(config.pairs_per_label):
            a, b = concepts[order[cursor]], concepts[order[cursor + 1]]
            relations[(a, b)] = label
            cursor += 2

    lexicon = Lexicon(
        verbs=verbs,
        concepts=concepts,
        relations=relations,
        subjects=subjects,
        templates=templates,
        seed=int(seed),
    )
    logger.debug(
        f"Built lexicon: {n_verbs} verbs, {len(concepts)} concepts, "
        f"{len(relations)} relations, {len(subjects)} subjects, {len(templates)} templates"
    )
    return lexicon
