"""Tests for the episodic memory."""

import numpy as np
import pytest

from c2gen.continual.memory import EpisodicMemory, MemoryItem, memory_update
from c2gen.instances import HEAD_CI


def _items(stage, count):
    return [MemoryItem(instance=None, stage=stage) for _ in range(count)]  # type: ignore[arg-type]


class TestReservoir:
    def test_fills_then_holds_capacity(self):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(10, "res")
        memory.begin_stage("S1", rng)
        for i, item in enumerate(_items("S1", 50)):
            memory.add(item, rng)
            assert len(memory) == min(i + 1, 10)
        assert memory.seen_total == 50

    def test_inclusion_is_uniform(self):
        rng = np.random.default_rng(1)
        n_items, capacity, trials = 1000, 100, 400
        items = _items("S1", n_items)
        index = {id(item): i for i, item in enumerate(items)}
        counts = np.zeros(n_items)
        memory = EpisodicMemory(capacity, "res")
        for _ in range(trials):
            memory.reset()
            memory.begin_stage("S1", rng)
            for item in items:
                memory.add(item, rng)
            for item in memory.items:
                counts[index[id(item)]] += 1
        freq = counts / trials
        assert abs(freq[:100].mean() - 0.1) < 0.01
        assert abs(freq[-100:].mean() - 0.1) < 0.01

    def test_spans_stages(self):
        rng = np.random.default_rng(2)
        memory = EpisodicMemory(20, "res")
        memory.begin_stage("S1", rng)
        for item in _items("S1", 20):
            memory.add(item, rng)
        memory.begin_stage("S2", rng)
        for item in _items("S2", 200):
            memory.add(item, rng)
        histogram = memory.stage_histogram()
        assert sum(histogram.values()) == 20
        assert histogram["S2"] > histogram["S1"]


class TestBuffered:
    def test_equal_quota_per_stage(self):
        rng = np.random.default_rng(3)
        memory = EpisodicMemory(20, "buff")
        memory.begin_stage("S1", rng)
        for item in _items("S1", 100):
            memory.add(item, rng)
        assert memory.stage_histogram() == {"S1": 20}

        memory.begin_stage("S2", rng)
        assert memory.stage_histogram() == {"S1": 10, "S2": 0}
        for item in _items("S2", 100):
            memory.add(item, rng)
        assert memory.stage_histogram() == {"S1": 10, "S2": 10}

    def test_three_stages(self):
        rng = np.random.default_rng(4)
        memory = EpisodicMemory(30, "buff")
        for stage in ("S1", "S2", "S3"):
            memory.begin_stage(stage, rng)
            for item in _items(stage, 40):
                memory.add(item, rng)
        assert memory.stage_histogram() == {"S1": 10, "S2": 10, "S3": 10}


class TestMemoryContract:
    def test_item_from_wrong_stage(self):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(5)
        memory.begin_stage("S1", rng)
        with pytest.raises(ValueError):
            memory.add(MemoryItem(instance=None, stage="S2"), rng)  # type: ignore[arg-type]

    def test_stage_begins_once(self):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(5)
        memory.begin_stage("S1", rng)
        with pytest.raises(ValueError):
            memory.begin_stage("S1", rng)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            EpisodicMemory(0)
        with pytest.raises(ValueError):
            EpisodicMemory(5, "fifo")

    def test_memory_update_checks_policy(self):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(5, "res")
        memory.begin_stage("S1", rng)
        item = MemoryItem(instance=None, stage="S1")  # type: ignore[arg-type]
        assert len(memory_update(memory, item, "res", rng)) == 1
        with pytest.raises(ValueError):
            memory_update(memory, item, "buff", rng)

    def test_sample_without_replacement(self):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(10)
        memory.begin_stage("S1", rng)
        for item in _items("S1", 10):
            memory.add(item, rng)
        idx = memory.sample(4, rng)
        assert idx == sorted(set(idx))
        assert len(idx) == 4
        assert len(memory.sample(50, rng)) == 10

    def test_reset(self):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(5)
        memory.begin_stage("S1", rng)
        memory.add(MemoryItem(instance=None, stage="S1"), rng)  # type: ignore[arg-type]
        memory.reset()
        assert len(memory) == 0
        assert memory.stages == []
        assert memory.seen_total == 0

    def test_capture_teacher(self, tiny_params, tiny_dataset):
        rng = np.random.default_rng(0)
        memory = EpisodicMemory(5)
        memory.begin_stage("S1", rng)
        for inst in tiny_dataset.instances[:3]:
            memory.add(MemoryItem(inst, "S1"), rng)
        memory.capture_teacher(tiny_params)
        assert all(item.teacher.shape == (3, 3) for item in memory.items)

    def test_batch_item_views(self, tiny_dataset):
        item = MemoryItem(tiny_dataset.instances[0], "S1", frozenset({HEAD_CI}), np.zeros((3, 3)))
        assert item.as_batch_item().heads == frozenset({HEAD_CI})
        assert item.as_batch_item().teacher is None
        distill = item.as_batch_item(with_teacher=True, supervise=False)
        assert distill.heads == frozenset()
        assert distill.teacher is not None
