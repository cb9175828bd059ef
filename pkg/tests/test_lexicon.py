"""Tests for the pseudo-word lexicon and primitive probes."""

import numpy as np
import pytest

from c2gen.config import LexiconConfig
from c2gen.errors import InventoryError
from c2gen.generation.lexicon import (
    CONCEPT_SLOT,
    RESERVED_TOKENS,
    Lexicon,
    build_lexicon,
    collision_probability,
    pseudo_words,
)
from c2gen.generation.primitives import generate_primitive_nli, realize_veridical
from c2gen.models import Label, Signature


class TestPseudoWords:
    def test_distinct_and_in_range(self):
        words = pseudo_words(np.random.default_rng(0), 200, 4, 7)
        assert len(set(words)) == 200
        assert all(4 <= len(w) <= 7 and w.isalpha() and w.islower() for w in words)

    def test_exclusion(self):
        first = pseudo_words(np.random.default_rng(0), 50)
        second = pseudo_words(np.random.default_rng(0), 50, exclude=first)
        assert not set(first) & set(second)
        assert not set(second) & RESERVED_TOKENS

    def test_bad_range(self):
        with pytest.raises(ValueError):
            pseudo_words(np.random.default_rng(0), 3, 5, 4)

    def test_collision_bound_small(self):
        assert collision_probability(100) < 1e-3


class TestBuildLexicon:
    def test_deterministic(self):
        config = LexiconConfig(concepts=12, pairs_per_label=2)
        assert build_lexicon(config, 5) == build_lexicon(config, 5)
        assert build_lexicon(config, 5).concepts != build_lexicon(config, 6).concepts

    def test_inventory_sizes(self):
        config = LexiconConfig(plus_verbs=3, neutral_verbs=4, minus_verbs=2, concepts=12, pairs_per_label=2)
        lexicon = build_lexicon(config, 1)
        assert len(lexicon.verbs_with(Signature.PLUS)) == 3
        assert len(lexicon.verbs_with(Signature.NEUTRAL)) == 4
        assert len(lexicon.verbs_with(Signature.MINUS)) == 2
        for label in Label:
            assert len(lexicon.pairs_with(label)) == 2

    def test_concepts_take_part_in_one_relation(self):
        lexicon = build_lexicon(LexiconConfig(concepts=12, pairs_per_label=2), 3)
        used = [c for pair in lexicon.relations for c in pair]
        assert len(used) == len(set(used))

    def test_templates_have_one_slot(self):
        lexicon = build_lexicon(LexiconConfig(concepts=12, pairs_per_label=2), 3)
        assert all(t.count(CONCEPT_SLOT) == 1 for t in lexicon.templates)
        assert CONCEPT_SLOT not in lexicon.tokens()

    def test_too_few_verbs(self):
        with pytest.raises(ValueError):
            build_lexicon(LexiconConfig(minus_verbs=1), 1)

    def test_too_few_concepts(self):
        with pytest.raises(ValueError):
            build_lexicon(LexiconConfig(concepts=8, pairs_per_label=1), 1)

    def test_relation_demand_exceeds_concepts(self):
        with pytest.raises(InventoryError):
            build_lexicon(LexiconConfig(concepts=12, pairs_per_label=3), 1)

    def test_dict_round_trip(self):
        lexicon = build_lexicon(LexiconConfig(concepts=12, pairs_per_label=2), 9)
        assert Lexicon.from_dict(lexicon.to_dict()) == lexicon

    def test_unknown_lookups(self):
        lexicon = build_lexicon(LexiconConfig(concepts=12, pairs_per_label=2), 9)
        with pytest.raises(KeyError):
            lexicon.signature_of("notaverb")
        with pytest.raises(KeyError):
            lexicon.label_of(("a", "b"))


class TestPrimitives:
    def test_nli_probes_per_label(self, tiny_lexicon):
        probes = generate_primitive_nli(tiny_lexicon, 10, np.random.default_rng(0))
        assert len(probes) == 30
        for label in Label:
            subset = [p for p in probes if p.gold == label]
            assert len(subset) == 10
            assert len({(p.premise, p.hypothesis) for p in subset}) == 10

    def test_nli_probe_differs_only_in_concept(self, tiny_lexicon):
        for probe in generate_primitive_nli(tiny_lexicon, 5, np.random.default_rng(1)):
            diff = [(a, b) for a, b in zip(probe.premise, probe.hypothesis) if a != b]
            assert diff == [tuple(probe.key)]
            assert tiny_lexicon.label_of(probe.key) == probe.gold

    def test_capacity_exceeded(self, tiny_lexicon):
        with pytest.raises(InventoryError):
            generate_primitive_nli(tiny_lexicon, 10_000, np.random.default_rng(0))

    def test_veridical_probe(self, tiny_lexicon):
        verb = tiny_lexicon.verbs_with(Signature.MINUS)[0]
        probe = realize_veridical(tiny_lexicon, verb, "subj", ("eat", "fish"))
        assert probe.premise == ("subj", verb, "to", "eat", "fish")
        assert probe.hypothesis == ("subj", "eat", "fish")
        assert probe.gold == Label.C
