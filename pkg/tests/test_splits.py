"""Tests for the nine-fold generalization splits."""

import pytest

from c2gen.config import make_rng
from c2gen.datasets import load_split, save_split
from c2gen.errors import CoverageError, InventoryError
from c2gen.generation.splits import ninefold_split, verify_split
from c2gen.instances import Split
from c2gen.models import ALL_COMP_TYPES, CompType


class TestNinefoldSplit:
    @pytest.mark.parametrize("fold", ALL_COMP_TYPES, ids=lambda ct: ct.code)
    def test_constraints_hold_for_every_fold(self, tiny_dataset, fold):
        split = ninefold_split(tiny_dataset.instances, fold, tiny_dataset.lexicon, make_rng(1, "split"))

        assert split.test
        assert all(inst.ctype == fold for inst in split.test)
        assert all(inst.ctype != fold for inst in split.train)
        train_verbs = {inst.verb for inst in split.train}
        train_pairs = {inst.pair for inst in split.train}
        assert {inst.verb for inst in split.test} <= train_verbs
        assert {inst.pair for inst in split.test} <= train_pairs

    def test_probes_aligned_with_test(self, tiny_split):
        assert len(tiny_split.unseen_prim_v) == len(tiny_split.test)
        assert len(tiny_split.unseen_prim_n) == len(tiny_split.test)
        for inst, pv, pn in zip(tiny_split.test, tiny_split.unseen_prim_v, tiny_split.unseen_prim_n):
            assert pv.key == inst.verb
            assert pv.gold == inst.ver.gold
            assert tuple(pn.key) == tuple(inst.pair)
            assert pn.gold == inst.nli.gold

    def test_deterministic(self, tiny_dataset):
        fold = CompType.from_code("oc")
        a = ninefold_split(tiny_dataset.instances, fold, tiny_dataset.lexicon, make_rng(4, "split"))
        b = ninefold_split(tiny_dataset.instances, fold, tiny_dataset.lexicon, make_rng(4, "split"))
        assert [i.surface for i in a.test] == [i.surface for i in b.test]
        assert [p.premise for p in a.unseen_prim_n] == [p.premise for p in b.unseen_prim_n]

    def test_missing_type(self, tiny_dataset):
        fold = CompType.from_code("+e")
        partial = [inst for inst in tiny_dataset.instances if inst.ctype.code != "-n"]
        with pytest.raises(InventoryError):
            ninefold_split(partial, fold, tiny_dataset.lexicon, make_rng(1, "split"))

    def test_save_and_load(self, tiny_split, tmp_path):
        save_split(tmp_path / "fold", tiny_split)
        loaded = load_split(tmp_path / "fold")
        assert loaded.fold == tiny_split.fold
        assert loaded.test == tiny_split.test
        assert loaded.unseen_prim_v == tiny_split.unseen_prim_v


class TestVerifySplit:
    def test_leaked_fold(self, tiny_split):
        leaked = Split(
            fold=tiny_split.fold,
            train=tiny_split.train + tiny_split.test[:1],
            test=tiny_split.test,
            unseen_prim_v=tiny_split.unseen_prim_v,
            unseen_prim_n=tiny_split.unseen_prim_n,
        )
        with pytest.raises(CoverageError):
            verify_split(leaked)

    def test_misaligned_probes(self, tiny_split):
        short = Split(
            fold=tiny_split.fold,
            train=tiny_split.train,
            test=tiny_split.test,
            unseen_prim_v=tiny_split.unseen_prim_v[:-1],
            unseen_prim_n=tiny_split.unseen_prim_n,
        )
        with pytest.raises(CoverageError):
            verify_split(short)

    def test_empty_test(self, tiny_split):
        with pytest.raises(CoverageError):
            verify_split(Split(fold=tiny_split.fold, train=tiny_split.train, test=[]))
