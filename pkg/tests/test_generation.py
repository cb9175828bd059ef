"""Tests for compositional instance synthesis and JSONL round trips."""

import json

import numpy as np
import pytest

from c2gen.config import REFERENCE_COUNTS
from c2gen.datasets import instance_from_dict, instance_to_dict, load_instances, save_instances
from c2gen.errors import InventoryError
from c2gen.generation.compositional import (
    assemble_compositional,
    build_dataset,
    compose_instance,
    decompose,
    default_counts,
)
from c2gen.generation.primitives import generate_primitive_nli
from c2gen.models import ALL_COMP_TYPES, Label, Signature, compose


class TestDefaultCounts:
    def test_scaled_reference_counts(self):
        counts = default_counts(1)
        assert [counts[ct] for ct in ALL_COMP_TYPES] == list(REFERENCE_COUNTS)
        assert sum(counts.values()) == 44730

    def test_divisor(self):
        counts = default_counts(24)
        assert counts[ALL_COMP_TYPES[0]] == 5976 // 24

    def test_bad_divisor(self):
        with pytest.raises(ValueError):
            default_counts(0)


class TestComposeInstance:
    def test_surface_and_labels(self, tiny_lexicon):
        nli = generate_primitive_nli(tiny_lexicon, 1, np.random.default_rng(0))[0]
        verb = tiny_lexicon.verbs_with(Signature.MINUS)[0]
        inst = compose_instance(tiny_lexicon, verb, nli)

        assert inst.premise == (nli.premise[0], verb, "to") + nli.premise[1:]
        assert inst.hypothesis == nli.hypothesis
        assert inst.ver.hypothesis == nli.premise
        assert inst.gold_ci == compose(Signature.MINUS, nli.gold)
        assert inst.is_consistent()
        assert decompose(inst) == (inst.ver, inst.nli)

    def test_rejects_veridical_probe(self, tiny_dataset):
        inst = tiny_dataset.instances[0]
        with pytest.raises(ValueError):
            compose_instance(tiny_dataset.lexicon, inst.verb, inst.ver)


class TestAssemble:
    def test_histogram_matches_counts(self, tiny_dataset, tiny_config):
        expected = tiny_config.dataset.counts_per_type()
        assert tiny_dataset.histogram() == expected

    def test_every_instance_consistent(self, tiny_dataset):
        assert all(inst.is_consistent() for inst in tiny_dataset.instances)

    def test_instances_distinct_per_type(self, tiny_dataset):
        surfaces = [inst.surface for inst in tiny_dataset.instances]
        assert len(surfaces) == len(set(surfaces))

    def test_deterministic(self, tiny_config):
        a = build_dataset(tiny_config, 1)
        b = build_dataset(tiny_config, 1)
        assert [i.surface for i in a.instances] == [i.surface for i in b.instances]

    def test_capacity_exceeded(self, tiny_dataset):
        counts = {ct: 10_000 for ct in ALL_COMP_TYPES}
        with pytest.raises(InventoryError):
            assemble_compositional(
                tiny_dataset.lexicon, tiny_dataset.primitives, counts, np.random.default_rng(0)
            )

    def test_needs_nine_counts(self, tiny_dataset):
        counts = {ALL_COMP_TYPES[0]: 1}
        with pytest.raises(ValueError):
            assemble_compositional(
                tiny_dataset.lexicon, tiny_dataset.primitives, counts, np.random.default_rng(0)
            )


class TestInstanceFiles:
    def test_save_and_load(self, tiny_dataset, tmp_path):
        path = save_instances(tmp_path / "instances.jsonl", tiny_dataset.instances)
        loaded = load_instances(path)
        assert loaded == tiny_dataset.instances

    def test_record_layout(self, tiny_dataset):
        record = instance_to_dict(tiny_dataset.instances[0])
        assert set(record) == {"premise", "hypothesis", "ctype", "gold_ci", "ver", "nli"}
        assert isinstance(record["nli"]["key"], list)
        assert isinstance(record["ver"]["key"], str)

    def test_inconsistent_record_rejected(self, tiny_dataset):
        record = instance_to_dict(tiny_dataset.instances[0])
        gold = Label.from_symbol(record["gold_ci"])
        record["gold_ci"] = Label((gold + 1) % 3).symbol
        with pytest.raises(ValueError):
            instance_from_dict(record)

    def test_bad_line_reports_position(self, tiny_dataset, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(instance_to_dict(tiny_dataset.instances[0])) + "\n{not json\n")
        with pytest.raises(ValueError, match=":2:"):
            load_instances(path)
