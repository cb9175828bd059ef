"""Oracle and property checks runnable outside pytest."""

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..config import ExperimentConfig, LexiconConfig, ModelConfig, make_rng
from ..continual.memory import EpisodicMemory, MemoryItem
from ..continual.strategies import agem_project, kd_loss
from ..evaluation.metrics import PXCI_KEYS, evaluate_predictions, forget
from ..generation.compositional import assemble_compositional, build_dataset, default_counts
from ..generation.lexicon import build_lexicon
from ..generation.primitives import generate_primitive_nli
from ..generation.splits import ninefold_split
from ..models import ALL_COMP_TYPES, COMPOSITION_TABLE, Label, Signature, compose, function_type
from ..network.gradcheck import check_gradients
from ..network.model import Batch, BatchItem
from ..network.params import dot, init_params
from ..network.vocab import Vocabulary
from .display import Display

# Composition table rows as (signature, nli label) -> gold, in row order 1..9.
EXPECTED_ROWS: Tuple[Tuple[str, str, str], ...] = (
    ("+", "e", "e"),
    ("+", "n", "n"),
    ("+", "c", "c"),
    ("o", "e", "n"),
    ("o", "n", "n"),
    ("o", "c", "n"),
    ("-", "e", "c"),
    ("-", "n", "n"),
    ("-", "c", "e"),
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class SelfCheckResults:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.passed == len(self.checks)


class SelfCheckRunner:
    """Runs the composition, split, gradient, memory, projection, distillation,
    forgetting and partition checks."""

    def __init__(
        self,
        config: Optional[ExperimentConfig] = None,
        seed: int = 1,
        reservoir_trials: int = 10_000,
        display: Optional[Display] = None,
    ):
        self.config = config or ExperimentConfig()
        self.seed = seed
        self.reservoir_trials = reservoir_trials
        self.display = display or Display()
        self.results = SelfCheckResults()

    def checks(self) -> List[Tuple[str, Callable[[], str]]]:
        return [
            ("composition oracle", self.check_composition),
            ("split constraints", self.check_splits),
            ("gradient correctness", self.check_gradients),
            ("reservoir uniformity", self.check_reservoir),
            ("A-GEM projection", self.check_agem),
            ("KD identity", self.check_kd),
            ("forget arithmetic", self.check_forget),
            ("P x CI partition", self.check_partition),
        ]

    def run(self) -> SelfCheckResults:
        for name, fn in self.checks():
            start = time.perf_counter()
            try:
                detail = fn()
                passed = True
            except AssertionError as e:
                detail, passed = str(e), False
            except Exception as e:
                detail, passed = f"{type(e).__name__}: {e}", False
            result = CheckResult(name, passed, detail, time.perf_counter() - start)
            self.results.checks.append(result)
            self.display.check(result.name, result.passed, result.detail, result.seconds)
        return self.results

    # Individual checks. Each raises AssertionError on failure and returns a detail line.

    def check_composition(self) -> str:
        for i, (v, n, gold) in enumerate(EXPECTED_ROWS):
            sig, label = Signature.from_symbol(v), Label.from_symbol(n)
            assert compose(sig, label) == Label.from_symbol(gold), f"row {i + 1}: compose mismatch"
            assert function_type(sig).apply(label) == compose(sig, label), f"row {i + 1}: f(v) mismatch"
            assert COMPOSITION_TABLE[sig][label] == ALL_COMP_TYPES[i].gold
        return "9/9 rows"

    def check_splits(self) -> str:
        dataset = build_dataset(self.config, self.seed)
        for fold in ALL_COMP_TYPES:
            split = ninefold_split(
                dataset.instances,
                fold,
                dataset.lexicon,
                make_rng(self.seed, "split"),
                self.config.dataset.max_split_attempts,
            )
            train_types = {i.ctype for i in split.train}
            assert fold not in train_types, f"fold {fold.code}: held-out type in train"
            assert {i.verb for i in split.test} <= {i.verb for i in split.train}, f"fold {fold.code}: verbs"
            assert {i.pair for i in split.test} <= {i.pair for i in split.train}, f"fold {fold.code}: pairs"
            for inst in split.train + split.test:
                assert inst.gold_ci == compose(inst.ctype.v, inst.ctype.n), "gold_ci mismatch"
        return f"9 folds over {len(dataset.instances)} instances"

    def check_gradients(self, batches: int = 10, tolerance: float = 1e-4) -> str:
        rng = make_rng(self.seed, "probe")
        lexicon = build_lexicon(LexiconConfig(concepts=24, pairs_per_label=4), self.seed)
        probes = generate_primitive_nli(lexicon, 20, rng)
        instances = assemble_compositional(lexicon, probes, default_counts(240), rng)
        vocab = Vocabulary.from_tokens(lexicon.tokens())
        params = init_params(vocab, ModelConfig(d_emb=6, hidden=5, init_scale=0.5), rng)
        worst = 0.0
        for b in range(batches):
            idx = rng.choice(len(instances), size=4, replace=False)
            items = []
            for k, i in enumerate(idx):
                teacher = rng.normal(size=(3, 3)) if k % 2 == 0 else None
                items.append(BatchItem(instances[int(i)], teacher=teacher))
            batch = Batch.from_items(vocab, items)
            reduction = "mean" if b % 2 == 0 else "sum"
            result = check_gradients(params, batch, rng, reduction=reduction)
            worst = max(worst, result.max_rel_error)
        assert worst < tolerance, f"max relative error {worst:.2e} >= {tolerance:.0e}"
        return f"{batches} batches, max relative error {worst:.2e}"

    def check_reservoir(self, n_items: int = 1000, capacity: int = 100, tolerance: float = 0.01) -> str:
        rng = make_rng(self.seed, "memory")
        stub_items = [MemoryItem(instance=None, stage="S1") for _ in range(n_items)]  # type: ignore[arg-type]
        index = {id(item): i for i, item in enumerate(stub_items)}
        counts = np.zeros(n_items)
        memory = EpisodicMemory(capacity, "res")
        for _ in range(self.reservoir_trials):
            memory.reset()
            memory.begin_stage("S1", rng)
            for item in stub_items:
                memory.add(item, rng)
            for item in memory.items:
                counts[index[id(item)]] += 1
        freq = counts / self.reservoir_trials
        inside = np.mean(np.abs(freq - capacity / n_items) <= tolerance)
        assert inside >= 0.99, f"only {inside:.1%} of items within tolerance"
        return f"{inside:.1%} of items within {capacity / n_items:.3f} ± {tolerance}"

    def check_agem(self, pairs: int = 1000) -> str:
        rng = make_rng(self.seed, "probe")
        shapes = {"a": (4, 3), "b": (5,)}
        unchanged = 0
        for _ in range(pairs):
            g = {k: rng.normal(size=s) for k, s in shapes.items()}
            g_ref = {k: rng.normal(size=s) for k, s in shapes.items()}
            projected = agem_project(g, g_ref)
            assert dot(projected, g_ref) >= -1e-9, "projected gradient conflicts with reference"
            if dot(g, g_ref) >= 0:
                assert all(np.array_equal(projected[k], g[k]) for k in g), "non-conflicting g changed"
                unchanged += 1
        return f"{pairs} pairs, {unchanged} left unchanged"

    def check_kd(self, sets: int = 100) -> str:
        rng = make_rng(self.seed, "probe")
        worst = 0.0
        for _ in range(sets):
            logits = rng.normal(scale=3.0, size=(3, 3))
            for tau in (1.0, 2.0, 5.0):
                worst = max(worst, abs(kd_loss(logits, logits, tau)))
        assert worst <= 1e-9, f"kd_loss(t, t) reached {worst:.2e}"
        return f"max |kd_loss(t, t)| = {worst:.1e}"

    def check_forget(self) -> str:
        value = forget(93.94, 71.15)
        assert value is not None and abs(value - 24.26) <= 0.01, f"forget(93.94, 71.15) = {value}"
        assert forget(55.0, 55.0) == 0.0
        assert forget(0.0, 10.0) is None
        return f"forget(93.94, 71.15) = {value:.2f}"

    def check_partition(self, trials: int = 50, n: int = 200) -> str:
        rng = make_rng(self.seed, "probe")
        for _ in range(trials):
            gold = rng.integers(0, 3, size=(n, 3))
            pred = np.where(rng.random((n, 3)) < 0.6, gold, rng.integers(0, 3, size=(n, 3)))
            report = evaluate_predictions(gold, pred)
            total = sum(report.pxci[k] for k in PXCI_KEYS)
            assert abs(total - 100.0) <= 0.01, f"categories sum to {total}"
            assert report.acc_ci == report.pxci["p_ok_ci_ok"] + report.pxci["p_fail_ci_ok"]
            assert report.acc_vn <= min(report.acc_v, report.acc_n)
        return f"{trials} random predictors"
