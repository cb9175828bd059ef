"""Tests for accuracies, forgetting, the P x CI partition and the per-type grid."""

import numpy as np
import pytest

from c2gen.evaluation.compactness import compactness, compactness_scores, probe_sample, silhouette
from c2gen.evaluation.metrics import (
    CSV_FIELDS,
    PXCI_KEYS,
    EvalReport,
    evaluate,
    evaluate_predictions,
    forget,
    instance_accuracies,
    majority_baseline,
    pxci_categorize,
    stage_accuracies,
)
from c2gen.evaluation.tables import PerTypeTable, per_type_table
from c2gen.instances import HEAD_CI, HEAD_V, Split
from c2gen.models import ALL_COMP_TYPES, CompType

# CI accuracy grid of a reference run: rows V_e, V_n, V_c; columns N_e, N_n, N_c.
REFERENCE_GRID = [
    [19.50, 73.86, 13.91],
    [100.0, 100.0, 57.21],
    [13.99, 26.50, 15.03],
]


class TestForget:
    def test_reference_values(self):
        assert forget(93.94, 71.15) == pytest.approx(24.26, abs=0.01)
        assert forget(100.0, 80.72) == pytest.approx(19.28, abs=0.01)

    def test_no_change(self):
        assert forget(55.0, 55.0) == 0.0

    def test_improvement_is_negative(self):
        assert forget(50.0, 60.0) == pytest.approx(-20.0)

    def test_undefined_for_zero(self):
        assert forget(0.0, 10.0) is None


class TestPxCI:
    def test_partition_sums_to_100(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p = rng.random(150) < 0.5
            ci = rng.random(150) < 0.5
            assert sum(pxci_categorize(p, ci).values()) == pytest.approx(100.0)

    def test_categories(self):
        result = pxci_categorize([True, True, False, False], [True, False, True, False])
        assert result == {key: 25.0 for key in PXCI_KEYS}

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            pxci_categorize([True], [True, False])


class TestEvaluatePredictions:
    def test_accuracies(self):
        gold = np.array([[0, 1, 2], [1, 1, 1], [2, 0, 2], [0, 0, 0]])
        pred = np.array([[0, 1, 2], [1, 0, 1], [2, 0, 0], [1, 0, 0]])
        report = evaluate_predictions(gold, pred, fold="+e")

        assert report.fold == "+e"
        assert report.n_test == 4
        assert report.acc_v == 75.0
        assert report.acc_n == 75.0
        assert report.acc_vn == 50.0
        assert report.acc_ci == 75.0
        assert report.pxci == {
            "p_ok_ci_ok": 25.0,
            "p_ok_ci_fail": 25.0,
            "p_fail_ci_ok": 50.0,
            "p_fail_ci_fail": 0.0,
        }

    def test_acc_ci_is_ci_correct_mass(self):
        rng = np.random.default_rng(1)
        gold = rng.integers(0, 3, size=(200, 3))
        pred = np.where(rng.random((200, 3)) < 0.6, gold, rng.integers(0, 3, size=(200, 3)))
        report = evaluate_predictions(gold, pred)
        assert report.acc_ci == pytest.approx(report.pxci["p_ok_ci_ok"] + report.pxci["p_fail_ci_ok"])
        assert report.acc_vn <= min(report.acc_v, report.acc_n)

    def test_empty(self):
        with pytest.raises(ValueError):
            evaluate_predictions(np.zeros((0, 3)), np.zeros((0, 3)))

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            evaluate_predictions(np.zeros((2, 2)), np.zeros((2, 2)))

    def test_majority_baseline(self):
        assert majority_baseline([0, 0, 1, 2]) == 50.0
        assert majority_baseline([]) == 0.0


class TestEvalReport:
    def test_dict_round_trip(self):
        report = EvalReport("oc", 10, 90.0, 80.0, 70.0, 60.0, forget_v=5.0, pxci={"p_ok_ci_ok": 60.0})
        assert EvalReport.from_dict(report.to_dict()) == report

    def test_csv_row(self):
        report = EvalReport("oc", 10, 90.0, 80.123, 70.0, 60.0)
        row = report.csv_row()
        assert list(row) == list(CSV_FIELDS)
        assert row["acc_n"] == "80.12"
        assert row["n_test"] == "10"
        assert row["forget_v"] == ""


class TestEvaluateModel:
    def test_evaluate_split(self, tiny_params, tiny_split):
        report = evaluate(tiny_params, tiny_split)
        assert report.fold == "+e"
        assert report.n_test == len(tiny_split.test)
        assert 0.0 <= report.acc_ci <= 100.0
        assert sum(report.pxci.values()) == pytest.approx(100.0)

    def test_evaluate_empty_test(self, tiny_params, tiny_split):
        with pytest.raises(ValueError):
            evaluate(tiny_params, Split(fold=tiny_split.fold, train=tiny_split.train, test=[]))

    def test_misaligned_probes(self, tiny_params, tiny_split):
        split = Split(
            fold=tiny_split.fold,
            train=tiny_split.train,
            test=tiny_split.test,
            unseen_prim_v=tiny_split.unseen_prim_v[:-1],
            unseen_prim_n=tiny_split.unseen_prim_n,
        )
        with pytest.raises(ValueError):
            evaluate(tiny_params, split)

    def test_stage_accuracies_keys(self, tiny_params, tiny_split):
        assert set(stage_accuracies(tiny_params, tiny_split)) == {"acc_v", "acc_n", "acc_vn", "acc_ci"}

    def test_instance_accuracies(self, tiny_params, tiny_dataset):
        scores = instance_accuracies(tiny_params, tiny_dataset.instances)
        assert scores["n"] == len(tiny_dataset.instances)
        assert scores["majority_ci"] >= 100.0 / 3

    def test_instance_accuracies_empty(self, tiny_params):
        with pytest.raises(ValueError):
            instance_accuracies(tiny_params, [])


class TestPerTypeTable:
    def test_reference_averages(self):
        table = PerTypeTable(np.array(REFERENCE_GRID))
        np.testing.assert_allclose(table.row_averages, [35.76, 85.74, 18.51], atol=0.01)
        np.testing.assert_allclose(table.column_averages, [44.50, 66.79, 28.72], atol=0.01)
        assert table.overall == pytest.approx(46.67, abs=0.01)

    def test_weighted_overall(self):
        sizes = np.ones((3, 3))
        sizes[0, 0] = 7
        table = PerTypeTable(np.array(REFERENCE_GRID), sizes)
        expected = (REFERENCE_GRID[0][0] * 7 + sum(sum(r) for r in REFERENCE_GRID) - REFERENCE_GRID[0][0]) / 15
        assert table.weighted_overall == pytest.approx(expected)

    def test_from_reports(self):
        reports = {
            ct: EvalReport(ct.code, 10, 0.0, 0.0, 0.0, REFERENCE_GRID[ct.v][ct.n]) for ct in ALL_COMP_TYPES
        }
        table = per_type_table(reports)
        assert table.cell(CompType.from_code("on")) == 100.0
        assert table.cell(CompType.from_code("-e")) == 13.99

    def test_missing_fold(self):
        reports = {ct: EvalReport(ct.code, 1, 0, 0, 0, 50.0) for ct in ALL_COMP_TYPES[:-1]}
        with pytest.raises(ValueError, match="-c"):
            per_type_table(reports)

    def test_layouts(self):
        table = PerTypeTable(np.array(REFERENCE_GRID))
        csv_lines = table.to_csv().splitlines()
        assert csv_lines[0] == ",n_e,n_n,n_c,avg"
        assert csv_lines[2] == "v_n,100.00,100.00,57.21,85.74"
        assert len(csv_lines) == 5
        markdown = table.to_markdown()
        assert "| V_n | 100.00 | 100.00 | 57.21 | 85.74 |" in markdown
        assert table.to_dict()["cells"]["+n"] == 73.86

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            PerTypeTable(np.zeros((2, 3)))


class TestCompactness:
    def test_separated_clusters(self):
        points = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]])
        assert silhouette(points, [0, 0, 1, 1]) > 0.9

    def test_mixed_clusters_score_low(self):
        points = np.array([[0.0, 0.0], [10.0, 10.0], [0.1, 0.0], [10.1, 10.0]])
        assert silhouette(points, [0, 0, 1, 1]) < 0.0

    def test_singleton_scores_zero(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [1.1, 0.0]])
        scores = silhouette(points, [0, 1, 1])
        assert -1.0 <= scores <= 1.0

    def test_needs_two_classes(self):
        with pytest.raises(ValueError):
            silhouette(np.zeros((3, 2)), [1, 1, 1])

    def test_model_compactness(self, tiny_params, tiny_dataset):
        probes = [i.ver for i in tiny_dataset.instances]
        assert -1.0 <= compactness(tiny_params, probes, HEAD_V) <= 1.0
        with pytest.raises(ValueError):
            compactness(tiny_params, probes, HEAD_CI)

    def test_scores_skip_single_class(self, tiny_params, tiny_dataset):
        plus_only = [i for i in tiny_dataset.instances if i.ctype.code.startswith("+")]
        scores = compactness_scores(tiny_params, plus_only)
        assert set(scores) == {"n"}

    def test_probe_sample(self, tiny_dataset):
        sample = probe_sample(tiny_dataset.instances, 10, np.random.default_rng(0))
        assert len(sample) == 10
        assert len(probe_sample(tiny_dataset.instances, 10_000, np.random.default_rng(0))) == len(
            tiny_dataset.instances
        )
