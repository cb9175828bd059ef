"""Tests for staged training under each continual strategy."""

from dataclasses import replace

import numpy as np
import pytest

from c2gen.config import STRATEGIES, make_rng
from c2gen.continual.memory import EpisodicMemory
from c2gen.continual.trainer import (
    Trainer,
    TrainLog,
    consumed_digest,
    stage_heads_by_surface,
    train_stage,
)
from c2gen.generation.streams import build_curriculum_stage, build_stream
from c2gen.instances import ALL_HEADS, Block, Stage
from c2gen.network.optim import AdamState
from c2gen.network.params import PARAM_NAMES


@pytest.fixture
def stream(tiny_split, tiny_lexicon, tiny_config):
    return build_stream(tiny_split, tiny_lexicon, tiny_config.stream, make_rng(1, "stream"))


def _trainer(params, config, kind="none", **stream_overrides):
    strategy = replace(config.strategy, kind=kind)
    return Trainer(params, config.model, strategy, seed=1, stream_config=replace(config.stream, **stream_overrides))


class TestTrainer:
    @pytest.mark.parametrize("kind", STRATEGIES)
    def test_every_strategy_runs(self, tiny_params, tiny_config, stream, kind):
        trainer = _trainer(tiny_params, tiny_config, kind)
        log = trainer.train_stream(stream)

        assert [s.stage for s in log.snapshots] == ["S1", "S2"]
        assert trainer.params.is_finite()
        assert all(np.isfinite(step.total) for step in log.losses)
        if kind == "none":
            assert trainer.memory is None
        else:
            assert 0 < len(trainer.memory) <= tiny_config.strategy.memory_size

    def test_step_count(self, tiny_params, tiny_config, stream):
        trainer = _trainer(tiny_params, tiny_config)
        log = trainer.train_stream(stream)
        per_stage = -(-tiny_config.stream.stage_size // tiny_config.model.batch_size)
        assert [s.steps for s in log.snapshots] == [per_stage, per_stage]
        assert trainer.steps == 2 * per_stage
        assert len(log.losses) == trainer.steps

    def test_deterministic(self, tiny_params, tiny_config, stream):
        a = _trainer(tiny_params.copy(), tiny_config, "er_mir")
        b = _trainer(tiny_params.copy(), tiny_config, "er_mir")
        log_a, log_b = a.train_stream(stream), b.train_stream(stream)

        assert [s.digest for s in log_a.snapshots] == [s.digest for s in log_b.snapshots]
        for name in PARAM_NAMES:
            np.testing.assert_array_equal(a.params[name], b.params[name])

    def test_digest_covers_every_presentation(self, tiny_params, tiny_config, stream):
        trainer = _trainer(tiny_params, tiny_config)
        snap = trainer.train_stage(stream.stages[0])
        assert snap.digest != consumed_digest(stream.stages[0].instances[:1])
        assert snap.instances == len(stream.stages[0])

    def test_buffered_memory_shares_capacity(self, tiny_params, tiny_config, stream):
        trainer = _trainer(tiny_params, tiny_config, "er_buff")
        trainer.train_stream(stream)
        assert trainer.memory.stage_histogram() == {"S1": 10, "S2": 10}

    def test_agem_counts_projections(self, tiny_params, tiny_config, stream):
        trainer = _trainer(tiny_params, tiny_config, "agem")
        log = trainer.train_stream(stream)
        assert log.agem_steps > 0
        assert 0 <= log.agem_projections <= log.agem_steps

    def test_kd_captures_teacher_at_stage_end(self, tiny_params, tiny_config, stream):
        trainer = _trainer(tiny_params, tiny_config, "kd")
        trainer.train_stage(stream.stages[0])
        assert all(item.teacher is not None for item in trainer.memory.items)
        trainer.train_stage(stream.stages[1])
        assert any(step.kd > 0 for step in trainer.log.losses if step.stage == "S2")

    def test_kd_replay_is_distillation_only(self, tiny_params, tiny_config, stream):
        trainer = _trainer(tiny_params, tiny_config, "kd")
        trainer.train_stage(stream.stages[0])
        rng = np.random.default_rng(0)
        trainer.params = trainer.params.replace(
            {k: v + rng.normal(scale=0.1, size=v.shape) for k, v in trainer.params.tensors.items()}
        )
        unsupervised = Stage(name="S2", blocks=[Block(stream.stages[1].instances, heads=frozenset())])
        trainer.train_stage(unsupervised)

        s2 = [step for step in trainer.log.losses if step.stage == "S2"]
        assert all(step.cr == 0.0 and step.prim == 0.0 for step in s2)
        assert all(step.kd > 0.0 for step in s2)

    def test_memory_reset_before_s3(self, tiny_params, tiny_config, tiny_split, tiny_lexicon):
        stream_config = replace(tiny_config.stream, curriculum="easy_hard", reset_memory_before_s3=True)
        stream = build_stream(tiny_split, tiny_lexicon, stream_config, make_rng(1, "stream"))
        trainer = _trainer(tiny_params, tiny_config, "er_res", curriculum="easy_hard", reset_memory_before_s3=True)
        trainer.train_stream(stream)
        assert set(trainer.memory.stage_histogram()) == {"S3"}

    @pytest.mark.parametrize("kind", ["er_res", "er_buff"])
    def test_primitives_first_offers_each_instance_once(self, tiny_params, tiny_config, tiny_split, kind):
        stage = build_curriculum_stage(
            tiny_split, "easy_hard", tiny_config.stream, make_rng(1, "stream"), primitives_first=True
        )
        strategy = replace(tiny_config.strategy, kind=kind, memory_size=100)
        trainer = Trainer(tiny_params, tiny_config.model, strategy, seed=1)
        trainer.train_stage(stage)

        surfaces = [item.instance.surface for item in trainer.memory.items]
        assert trainer.memory.seen_per_stage["S3"] == tiny_config.stream.curriculum_size
        assert len(surfaces) == len(set(surfaces)) == tiny_config.stream.curriculum_size
        assert all(item.heads == ALL_HEADS for item in trainer.memory.items)

    def test_stage_heads_are_unioned_per_surface(self, tiny_split, tiny_config):
        stage = build_curriculum_stage(
            tiny_split, "hard_easy", tiny_config.stream, make_rng(1, "stream"), primitives_first=True
        )
        heads = stage_heads_by_surface(stage)
        assert len(heads) == tiny_config.stream.curriculum_size
        assert set(heads.values()) == {ALL_HEADS}

    def test_eval_hook_per_stage(self, tiny_params, tiny_config, stream):
        calls = []

        def hook(params, stage):
            calls.append(stage)
            return {"acc_v": 50.0, "acc_n": 40.0, "acc_vn": 20.0, "acc_ci": 30.0}

        trainer = Trainer(tiny_params, tiny_config.model, tiny_config.strategy, 1, eval_hook=hook)
        log = trainer.train_stream(stream)
        assert calls == ["S1", "S2"]
        assert log.snapshot("S2").acc_ci == 30.0
        assert log.snapshot("S3") is None

    def test_empty_stage(self, tiny_params, tiny_config):
        trainer = _trainer(tiny_params, tiny_config)
        with pytest.raises(ValueError):
            trainer.train_stage(Stage(name="S1", blocks=[Block([])]))

    def test_log_dict_round_trip(self, tiny_params, tiny_config, stream):
        log = _trainer(tiny_params, tiny_config, "agem").train_stream(stream)
        restored = TrainLog.from_dict(log.to_dict())
        assert restored == log


class TestFunctionalTrainStage:
    def test_returns_updated_state(self, tiny_params, tiny_config, stream):
        strategy = replace(tiny_config.strategy, kind="er_res")
        memory = EpisodicMemory(strategy.memory_size, "res")
        optimizer = AdamState.zeros(tiny_params)
        params, memory_out, optimizer_out, log = train_stage(
            tiny_params, stream.stages[0], memory, strategy, optimizer, tiny_config.model, seed=1
        )
        assert memory_out is memory
        assert len(memory) > 0
        assert optimizer_out.step == log.snapshots[0].steps
        assert not np.array_equal(params["Wc"], tiny_params["Wc"])
