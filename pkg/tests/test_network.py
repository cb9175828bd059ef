"""Tests for the vocabulary, parameters and forward pass."""

import math

import numpy as np
import pytest

from c2gen.config import ModelConfig
from c2gen.errors import VocabularyError
from c2gen.instances import HEAD_CI, HEAD_N, HEAD_V, SEP_TOKEN, TO_TOKEN
from c2gen.models import Label
from c2gen.network.model import (
    Batch,
    BatchItem,
    forward,
    head_logits,
    head_sequence,
    hidden_states,
    loss,
    loss_and_grad,
    per_instance_loss,
    predict,
    predict_batch,
    teacher_logits,
)
from c2gen.network.params import PARAM_NAMES, ModelParams, dot, flatten, init_params, norm
from c2gen.network.vocab import Vocabulary


class TestVocabulary:
    def test_function_tokens_first(self):
        vocab = Vocabulary.from_tokens(["zeta", "alpha", TO_TOKEN, SEP_TOKEN, "alpha"])
        assert vocab.tokens == [SEP_TOKEN, TO_TOKEN, "alpha", "zeta"]
        assert vocab.sep_id == 0

    def test_encode_decode(self):
        vocab = Vocabulary.from_tokens(["b", "a"])
        ids = vocab.encode(["a", SEP_TOKEN, "b"])
        assert vocab.decode(ids) == ["a", SEP_TOKEN, "b"]

    def test_unknown_token_is_error(self):
        vocab = Vocabulary.from_tokens(["a"])
        with pytest.raises(VocabularyError):
            vocab.encode(["missing"])
        with pytest.raises(VocabularyError):
            vocab.decode([99])

    def test_requires_sep(self):
        with pytest.raises(VocabularyError):
            Vocabulary(["a", "b"])

    def test_extend_keeps_ids(self):
        vocab = Vocabulary.from_tokens(["a", "b"])
        wider = vocab.extend(["c", "a"])
        assert len(wider) == len(vocab) + 1
        assert all(wider.id_of(t) == vocab.id_of(t) for t in vocab.tokens)


class TestParams:
    def test_shapes(self, tiny_params, tiny_vocab):
        assert set(tiny_params.tensors) == set(PARAM_NAMES)
        assert tiny_params["emb"].shape == (len(tiny_vocab), 8)
        assert tiny_params["W2"].shape == (8, 8)
        assert tiny_params["Wc"].shape == (8, 3)
        assert not tiny_params["b1"].any()

    def test_init_range(self, tiny_vocab):
        params = init_params(tiny_vocab, ModelConfig(init_scale=0.05), np.random.default_rng(0))
        assert np.abs(params["W1"]).max() <= 0.05

    def test_embedding_rows_must_match_vocab(self, tiny_params):
        tensors = dict(tiny_params.tensors)
        tensors["emb"] = tensors["emb"][:-1]
        with pytest.raises(ValueError):
            ModelParams(tiny_params.vocab, tensors)

    def test_extend_vocab(self, tiny_params):
        wider = tiny_params.extend_vocab(["newone", "newtwo"], np.random.default_rng(0))
        assert wider["emb"].shape[0] == tiny_params["emb"].shape[0] + 2
        np.testing.assert_array_equal(wider["emb"][:-2], tiny_params["emb"])

    def test_gradient_arithmetic(self, tiny_params):
        g = tiny_params.tensors
        assert dot(g, g) == pytest.approx(norm(g) ** 2)
        assert flatten(g).size == sum(v.size for v in g.values())


class TestForward:
    def test_forward_outputs(self, tiny_params, tiny_dataset):
        inst = tiny_dataset.instances[0]
        ids = tiny_params.vocab.encode(head_sequence(inst, HEAD_CI))
        hidden, lv, ln, lc = forward(tiny_params, ids)
        assert hidden.shape == (8,)
        assert lv.shape == ln.shape == lc.shape == (3,)
        batched = head_logits(tiny_params, [head_sequence(inst, HEAD_CI)], HEAD_CI)[0]
        np.testing.assert_allclose(lc, batched)

    def test_forward_rejects_bad_ids(self, tiny_params):
        with pytest.raises(VocabularyError):
            forward(tiny_params, [len(tiny_params.vocab)])
        with pytest.raises(ValueError):
            forward(tiny_params, [])

    def test_hidden_state_bounded(self, tiny_params, tiny_dataset):
        seqs = [head_sequence(i, HEAD_V) for i in tiny_dataset.instances[:10]]
        h = hidden_states(tiny_params, seqs)
        assert h.shape == (10, 8)
        assert np.all(np.abs(h) < 1.0)

    def test_padding_does_not_change_encoding(self, tiny_params, tiny_dataset):
        short, long = sorted(tiny_dataset.instances[:2], key=lambda i: len(head_sequence(i, HEAD_CI)))
        seq = head_sequence(short, HEAD_CI)
        alone = hidden_states(tiny_params, [seq])
        together = hidden_states(tiny_params, [seq, head_sequence(long, HEAD_CI) + (TO_TOKEN,) * 3])[:1]
        np.testing.assert_allclose(alone, together)

    def test_predict_matches_batch(self, tiny_params, tiny_dataset):
        instances = tiny_dataset.instances[:5]
        batch = predict_batch(tiny_params, instances)
        for inst, row in zip(instances, batch):
            assert predict(tiny_params, inst) == tuple(Label(int(x)) for x in row)

    def test_predict_ties_go_to_lowest_code(self, tiny_params, tiny_dataset):
        tensors = {k: np.zeros_like(v) for k, v in tiny_params.tensors.items()}
        flat = tiny_params.replace(tensors)
        assert predict(flat, tiny_dataset.instances[0]) == (Label.E, Label.E, Label.E)

    def test_teacher_logit_shape(self, tiny_params, tiny_dataset):
        assert teacher_logits(tiny_params, tiny_dataset.instances[:4]).shape == (4, 3, 3)


class TestLoss:
    def test_uniform_model_loss(self, tiny_params, tiny_dataset):
        flat = tiny_params.replace({k: np.zeros_like(v) for k, v in tiny_params.tensors.items()})
        batch = Batch.from_instances(flat.vocab, tiny_dataset.instances[:6])
        losses = loss(flat, batch, reduction="mean")
        assert losses.cr == pytest.approx(np.log(3))
        assert losses.prim == pytest.approx(2 * np.log(3))
        assert losses.total == pytest.approx(3 * np.log(3))
        assert losses.kd == 0.0

    def test_sum_is_batch_size_times_mean(self, tiny_params, tiny_dataset):
        batch = Batch.from_instances(tiny_params.vocab, tiny_dataset.instances[:6])
        mean = loss(tiny_params, batch, reduction="mean").total
        total = loss(tiny_params, batch, reduction="sum").total
        assert total == pytest.approx(6 * mean)

    def test_unsupervised_item_contributes_nothing(self, tiny_params, tiny_dataset):
        inst = tiny_dataset.instances[0]
        batch = Batch.from_items(tiny_params.vocab, [BatchItem(inst, frozenset())])
        assert per_instance_loss(tiny_params, batch)[0] == 0.0
        assert loss(tiny_params, batch).total == 0.0

    def test_head_mask(self, tiny_params, tiny_dataset):
        inst = tiny_dataset.instances[0]
        only_ci = Batch.from_items(tiny_params.vocab, [BatchItem(inst, frozenset({HEAD_CI}))])
        losses = loss(tiny_params, only_ci)
        assert losses.prim == 0.0
        assert losses.cr > 0.0

    def test_identical_teacher_gives_zero_kd(self, tiny_params, tiny_dataset):
        inst = tiny_dataset.instances[0]
        teacher = teacher_logits(tiny_params, [inst])[0]
        batch = Batch.from_items(tiny_params.vocab, [BatchItem(inst, frozenset(), teacher)])
        assert loss(tiny_params, batch, kd_weight=1.0).kd == pytest.approx(0.0, abs=1e-12)

    def test_empty_batch(self, tiny_params):
        with pytest.raises(ValueError):
            Batch.from_items(tiny_params.vocab, [])

    def test_unknown_reduction(self, tiny_params, tiny_dataset):
        batch = Batch.from_instances(tiny_params.vocab, tiny_dataset.instances[:2])
        with pytest.raises(ValueError):
            loss(tiny_params, batch, reduction="max")


class TestEncoderInvariants:
    def test_mean_pool_ignores_token_order(self, tiny_params, tiny_dataset):
        seq = head_sequence(tiny_dataset.instances[0], HEAD_CI)
        order = np.random.default_rng(0).permutation(len(seq))
        shuffled = tuple(seq[i] for i in order)
        np.testing.assert_allclose(
            hidden_states(tiny_params, [seq]), hidden_states(tiny_params, [shuffled]), rtol=0, atol=1e-12
        )
        reversed_seq = tuple(reversed(seq))
        np.testing.assert_allclose(
            hidden_states(tiny_params, [seq]), hidden_states(tiny_params, [reversed_seq]), rtol=0, atol=1e-12
        )

    def test_forward_matches_hand_computation(self):
        vocab = Vocabulary.from_tokens(["a", "b"])
        tensors = {
            "emb": np.array([[0.0, 0.0], [0.0, 0.0], [0.2, -0.4], [0.6, 0.1]]),
            "W1": np.array([[0.5, -0.3], [0.1, 0.8]]),
            "b1": np.array([0.05, -0.02]),
            "W2": np.array([[0.7, 0.2], [-0.4, 0.3]]),
            "b2": np.array([0.0, 0.1]),
            "Wv": np.array([[0.3, -0.2, 0.1], [0.5, 0.4, -0.6]]),
            "bv": np.array([0.1, 0.0, -0.1]),
            "Wn": np.array([[-0.5, 0.2, 0.3], [0.1, -0.1, 0.2]]),
            "bn": np.array([0.0, 0.2, 0.0]),
            "Wc": np.array([[0.4, 0.4, -0.8], [0.9, -0.3, 0.0]]),
            "bc": np.array([0.0, 0.0, 0.05]),
        }
        params = ModelParams(vocab, tensors)

        # Mean of the rows of "a" and "b": (0.4, -0.15).
        x = (0.4, -0.15)
        h1 = (
            math.tanh(x[0] * 0.5 + x[1] * 0.1 + 0.05),
            math.tanh(x[0] * -0.3 + x[1] * 0.8 - 0.02),
        )
        h = (
            math.tanh(h1[0] * 0.7 + h1[1] * -0.4 + 0.0),
            math.tanh(h1[0] * 0.2 + h1[1] * 0.3 + 0.1),
        )

        def head(w, b):
            return [h[0] * w[0][k] + h[1] * w[1][k] + b[k] for k in range(3)]

        hidden, lv, ln, lc = forward(params, vocab.encode(["a", "b"]))
        np.testing.assert_allclose(hidden, h, rtol=0, atol=1e-6)
        np.testing.assert_allclose(lv, head(tensors["Wv"], tensors["bv"]), rtol=0, atol=1e-6)
        np.testing.assert_allclose(ln, head(tensors["Wn"], tensors["bn"]), rtol=0, atol=1e-6)
        np.testing.assert_allclose(lc, head(tensors["Wc"], tensors["bc"]), rtol=0, atol=1e-6)

    def test_head_mask_gradients_add_up(self, tiny_params, tiny_dataset):
        instances = tiny_dataset.instances[:4]
        everything = Batch.from_instances(tiny_params.vocab, instances)
        ci_only = Batch.from_instances(tiny_params.vocab, instances, heads=frozenset({HEAD_CI}))
        prim_only = Batch.from_instances(tiny_params.vocab, instances, heads=frozenset({HEAD_V, HEAD_N}))

        l_all, g_all = loss_and_grad(tiny_params, everything)
        l_ci, g_ci = loss_and_grad(tiny_params, ci_only)
        l_prim, g_prim = loss_and_grad(tiny_params, prim_only)

        assert l_ci.prim == 0.0
        assert l_prim.cr == 0.0
        assert l_all.total == pytest.approx(l_ci.total + l_prim.total, rel=1e-12)
        for name in PARAM_NAMES:
            np.testing.assert_allclose(g_all[name], g_ci[name] + g_prim[name], rtol=0, atol=1e-12)
