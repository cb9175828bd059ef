"""Configuration utilities for the c2gen laboratory.

This module centralizes every experiment setting: lexicon and dataset sizes,
stream construction, network hyperparameters and the continual strategy. It
also provides the seed-splitting function that derives independent sub-seeds
for each random component, and the YAML loader that checks a configuration
document against the schema defined by the dataclasses below.
"""

import itertools
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union, get_args, get_origin, get_type_hints

import numpy as np
import yaml

from .errors import ConfigError
from .models import ALL_COMP_TYPES, CompType, Signature

logger = logging.getLogger(__name__)

# Per-type dataset counts in composition-table row order (+e, +n, +c, oe, on, oc, -e, -n, -c).
REFERENCE_COUNTS = (5976, 5544, 5520, 5976, 5544, 5520, 3735, 3465, 3450)

REGIMES = ("cgen", "c2gen")
ORDERS = ("ver_nat", "nat_ver")
STRATEGIES = ("none", "er_res", "er_buff", "er_mir", "agem", "kd")
CURRICULA = ("none", "easy_hard", "hard_easy", "prim_easy_hard", "prim_hard_easy")
REDUCTIONS = ("mean", "sum")
PRIMITIVE_SUPERVISION = ("all", "focused")
CGEN_POOLS = ("train", "stages")

OUTPUT_ENV_VAR = "C2GEN_OUT"

# Order matters: the position is the spawn key of the component's sub-seed.
SEED_COMPONENTS = ("lexicon", "data", "split", "stream", "init", "shuffle", "memory", "probe")


def derive_seed(seed: int, component: str) -> int:
    """Derive the sub-seed of one random component from a run seed.

    The sub-seed is the first 32-bit word of
    ``SeedSequence(seed, spawn_key=(SEED_COMPONENTS.index(component),))``, so
    each component can be varied independently while staying reproducible.

    Args:
        seed: The run seed.
        component: One of SEED_COMPONENTS.

    Returns:
        A non-negative integer sub-seed.
    """
    if component not in SEED_COMPONENTS:
        raise ValueError(f"Unknown seed component {component!r}; expected one of {SEED_COMPONENTS}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=(SEED_COMPONENTS.index(component),))
    return int(sequence.generate_state(1)[0])


def make_rng(seed: int, component: str) -> np.random.Generator:
    """Random generator for one component of a run."""
    return np.random.default_rng(derive_seed(seed, component))


@dataclass
class SystemConfig:
    """System-level configuration settings.

    Attributes:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        log_file: Optional path to a log file.
    """

    log_level: str = "INFO"
    log_file: Optional[str] = None


@dataclass
class LexiconConfig:
    """Sizes of the synthetic lexicon.

    Attributes:
        plus_verbs: Verbs with positive signature.
        neutral_verbs: Verbs with neutral signature.
        minus_verbs: Verbs with negative signature.
        concepts: Concept inventory size.
        pairs_per_label: Related concept pairs generated per label.
        subjects: Subject tokens.
        templates: Verb-phrase templates.
        min_token_length: Shortest pseudo-word.
        max_token_length: Longest pseudo-word.
    """

    plus_verbs: int = 8
    neutral_verbs: int = 8
    minus_verbs: int = 5
    concepts: int = 48
    pairs_per_label: int = 8
    subjects: int = 16
    templates: int = 16
    min_token_length: int = 4
    max_token_length: int = 7

    def verb_counts(self) -> Dict[Signature, int]:
        return {
            Signature.PLUS: self.plus_verbs,
            Signature.NEUTRAL: self.neutral_verbs,
            Signature.MINUS: self.minus_verbs,
        }


@dataclass
class DatasetConfig:
    """Dataset synthesis settings.

    Attributes:
        nli_per_label: Primitive NLI probe surfaces generated per label.
        count_divisor: Divisor applied to the per-type reference counts.
        counts: Explicit per-type counts in row order (overrides the divisor).
        max_split_attempts: Re-sampling rounds before a split gives up on coverage.
        compactness_probes: Train instances whose probes feed the compactness metric.
    """

    nli_per_label: int = 1100
    count_divisor: int = 4
    counts: Optional[List[int]] = None
    max_split_attempts: int = 20
    compactness_probes: int = 300

    def counts_per_type(self) -> Dict[CompType, int]:
        raw = self.counts if self.counts is not None else [c // self.count_divisor for c in REFERENCE_COUNTS]
        return dict(zip(ALL_COMP_TYPES, raw))


@dataclass
class StreamConfig:
    """Training stream construction.

    Attributes:
        regime: "cgen" (one shuffled stage) or "c2gen" (ordered stages).
        order: "ver_nat" or "nat_ver"; required iff regime is c2gen.
        stage_size: Instances per C2Gen stage.
        epochs: Epochs per stage (per block for curriculum stages).
        ver_pairs_per_label: Fixed NLI pairs per label in the veridical stage.
        nli_verbs_per_signature: Fixed verbs per signature in the NLI stage.
        primitive_supervision: "all" heads on every instance, or "focused" on the stage's primitive.
        cgen_pool: "train" (all train data) or "stages" (union of both C2Gen stages).
        curriculum: S3 function ordering, or "none".
        curriculum_size: Instances in S3.
        reset_memory_before_s3: Start S3 with an empty episodic memory.
    """

    regime: str = "c2gen"
    order: Optional[str] = "ver_nat"
    stage_size: int = 3200
    epochs: int = 3
    ver_pairs_per_label: int = 4
    nli_verbs_per_signature: int = 1
    primitive_supervision: str = "all"
    cgen_pool: str = "train"
    curriculum: str = "none"
    curriculum_size: int = 3200
    reset_memory_before_s3: bool = False


@dataclass
class ModelConfig:
    """Network and optimizer hyperparameters.

    Attributes:
        d_emb: Embedding width.
        hidden: Encoder width.
        lr: Adam learning rate.
        batch_size: Training batch size.
        reduction: "mean" (per-instance mean) or "sum" over the batch.
        init_scale: Half-width of the uniform weight initialization.
    """

    d_emb: int = 32
    hidden: int = 64
    lr: float = 1e-3
    batch_size: int = 8
    reduction: str = "mean"
    init_scale: float = 0.1


@dataclass
class StrategyConfig:
    """Continual strategy settings.

    Attributes:
        kind: none, er_res, er_buff, er_mir, agem or kd.
        memory_size: Episodic memory capacity M.
        replay_batch: Items drawn from memory per step (None = batch size).
        mir_candidates: Candidate pool for maximally interfered retrieval.
        kd_temperature: Distillation temperature.
        kd_weight: Distillation weight.
    """

    kind: str = "none"
    memory_size: int = 100
    replay_batch: Optional[int] = None
    mir_candidates: int = 50
    kd_temperature: float = 2.0
    kd_weight: float = 1.0

    def effective_replay_batch(self, batch_size: int) -> int:
        return self.replay_batch if self.replay_batch is not None else batch_size

    @property
    def uses_memory(self) -> bool:
        return self.kind != "none"


@dataclass
class GridAxes:
    """Axes of an experiment grid; every combination becomes one variant."""

    regimes: List[str] = field(default_factory=lambda: list(REGIMES))
    orders: List[str] = field(default_factory=lambda: list(ORDERS))
    strategies: List[str] = field(default_factory=lambda: list(STRATEGIES))
    curricula: List[str] = field(default_factory=lambda: ["none"])


def _coerce(value: Any, typ: Any, where: str) -> Any:
    """Convert a YAML value to the annotated field type."""
    origin = get_origin(typ)
    if origin is Union:
        if value is None:
            return None
        inner = [a for a in get_args(typ) if a is not type(None)]
        return _coerce(value, inner[0], where)
    if origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list, got {type(value).__name__}")
        (inner,) = get_args(typ)
        return [_coerce(v, inner, where) for v in value]
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if typ in (int, float, str):
        if isinstance(value, bool) or value is None:
            raise ConfigError(f"{where}: expected {typ.__name__}, got {value!r}")
        if typ is int and isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        try:
            return typ(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected {typ.__name__}, got {value!r}") from None
    return value


def _parse_section(cls: Any, data: Any, section: str) -> Any:
    """Build a config dataclass from a mapping, rejecting unknown keys."""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{section}' must be a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown key(s) in '{section}': {', '.join(unknown)}")
    hints = get_type_hints(cls)
    kwargs = {name: _coerce(value, hints[name], f"{section}.{name}") for name, value in data.items()}
    return cls(**kwargs)


def _parse_folds(raw: Any) -> List[CompType]:
    if raw is None or raw == "all":
        return list(ALL_COMP_TYPES)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"folds: expected 'all' or a non-empty list, got {raw!r}")
    folds = []
    for item in raw:
        try:
            fold = CompType.from_index(item) if isinstance(item, int) else CompType.from_code(str(item))
        except ValueError as e:
            raise ConfigError(f"folds: {e}") from None
        if fold not in folds:
            folds.append(fold)
    return sorted(folds, key=lambda f: f.index)


_TOP_LEVEL_KEYS = {
    "system",
    "lexicon",
    "dataset",
    "stream",
    "model",
    "strategy",
    "folds",
    "seeds",
    "output_dir",
    "grid",
}


@dataclass
class ExperimentConfig:
    """Complete configuration of one experiment variant (and optionally a grid).

    The YAML file mirrors the dataclass nesting:
    ```yaml
    stream:
      regime: c2gen
      order: ver_nat
    strategy:
      kind: er_res
    folds: ["+e", "oc"]
    seeds: [1, 2, 3]
    ```
    """

    system: SystemConfig = field(default_factory=SystemConfig)
    lexicon: LexiconConfig = field(default_factory=LexiconConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    stream: StreamConfig = field(default_factory=StreamConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    folds: List[CompType] = field(default_factory=lambda: list(ALL_COMP_TYPES))
    seeds: List[int] = field(default_factory=lambda: [1, 2, 3])
    output_dir: str = "runs"
    grid: Optional[GridAxes] = None

    def __post_init__(self) -> None:
        self.validate()

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """Load and validate an experiment configuration from a YAML file.

        Args:
            path: Path to the YAML document.

        Returns:
            The validated ExperimentConfig.

        Raises:
            FileNotFoundError: If the file does not exist.
            ConfigError: If the document violates the schema.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        with open(path, "r") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"{path}: invalid YAML: {e}") from None

        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("Configuration root must be a mapping")
        unknown = sorted(set(data) - _TOP_LEVEL_KEYS)
        if unknown:
            raise ConfigError(f"Unknown top-level key(s): {', '.join(unknown)}")

        stream_data = dict(data.get("stream") or {})
        # A cgen stream has no order unless one is given explicitly.
        if stream_data.get("regime") == "cgen" and "order" not in stream_data:
            stream_data["order"] = None

        seeds_raw = data.get("seeds", [1, 2, 3])
        seeds = _coerce(seeds_raw, List[int], "seeds")
        if not seeds:
            raise ConfigError("seeds: at least one seed is required")

        grid = None
        if data.get("grid") is not None:
            grid = _parse_section(GridAxes, data["grid"], "grid")

        return cls(
            system=_parse_section(SystemConfig, data.get("system"), "system"),
            lexicon=_parse_section(LexiconConfig, data.get("lexicon"), "lexicon"),
            dataset=_parse_section(DatasetConfig, data.get("dataset"), "dataset"),
            stream=_parse_section(StreamConfig, stream_data, "stream"),
            model=_parse_section(ModelConfig, data.get("model"), "model"),
            strategy=_parse_section(StrategyConfig, data.get("strategy"), "strategy"),
            folds=_parse_folds(data.get("folds", "all")),
            seeds=seeds,
            output_dir=str(data.get("output_dir", "runs")),
            grid=grid,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Plain-data echo of the configuration (inverse of from_dict)."""
        data = {
            "system": asdict(self.system),
            "lexicon": asdict(self.lexicon),
            "dataset": asdict(self.dataset),
            "stream": asdict(self.stream),
            "model": asdict(self.model),
            "strategy": asdict(self.strategy),
            "folds": [f.code for f in self.folds],
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "grid": asdict(self.grid) if self.grid is not None else None,
        }
        return data

    def validate(self) -> None:
        """Check cross-field invariants.

        Raises:
            ConfigError: On the first violated invariant.
        """
        s = self.stream
        if s.regime not in REGIMES:
            raise ConfigError(f"stream.regime must be one of {REGIMES}, got {s.regime!r}")
        if s.regime == "c2gen" and s.order not in ORDERS:
            raise ConfigError(f"stream.order must be one of {ORDERS} for c2gen, got {s.order!r}")
        if s.regime == "cgen" and s.order is not None:
            raise ConfigError("stream.order applies only to the c2gen regime")
        if s.curriculum not in CURRICULA:
            raise ConfigError(f"stream.curriculum must be one of {CURRICULA}, got {s.curriculum!r}")
        if s.curriculum != "none" and s.regime != "c2gen":
            raise ConfigError("stream.curriculum requires the c2gen regime")
        if s.primitive_supervision not in PRIMITIVE_SUPERVISION:
            raise ConfigError(
                f"stream.primitive_supervision must be one of {PRIMITIVE_SUPERVISION}"
            )
        if s.cgen_pool not in CGEN_POOLS:
            raise ConfigError(f"stream.cgen_pool must be one of {CGEN_POOLS}")
        for name in ("stage_size", "epochs", "ver_pairs_per_label", "nli_verbs_per_signature"):
            if getattr(s, name) < 1:
                raise ConfigError(f"stream.{name} must be >= 1")

        m = self.model
        if m.lr <= 0:
            raise ConfigError(f"model.lr must be > 0, got {m.lr}")
        if m.batch_size < 1 or m.d_emb < 1 or m.hidden < 1:
            raise ConfigError("model.batch_size, model.d_emb and model.hidden must be >= 1")
        if m.reduction not in REDUCTIONS:
            raise ConfigError(f"model.reduction must be one of {REDUCTIONS}")

        st = self.strategy
        if st.kind not in STRATEGIES:
            raise ConfigError(f"strategy.kind must be one of {STRATEGIES}, got {st.kind!r}")
        if st.memory_size < 1:
            raise ConfigError("strategy.memory_size must be >= 1")
        replay = st.effective_replay_batch(m.batch_size)
        if not 1 <= replay <= st.memory_size:
            raise ConfigError(
                f"strategy.replay_batch ({replay}) must be in [1, memory_size={st.memory_size}]"
            )
        if not 1 <= st.mir_candidates <= st.memory_size:
            raise ConfigError(
                f"strategy.mir_candidates ({st.mir_candidates}) must be in [1, memory_size={st.memory_size}]"
            )
        if st.kd_temperature <= 0:
            raise ConfigError("strategy.kd_temperature must be > 0")

        d = self.dataset
        if d.count_divisor < 1:
            raise ConfigError("dataset.count_divisor must be >= 1")
        if d.counts is not None and (len(d.counts) != 9 or min(d.counts) < 0):
            raise ConfigError("dataset.counts must have nine non-negative entries")
        if d.nli_per_label < 1:
            raise ConfigError("dataset.nli_per_label must be >= 1")

        if not self.folds:
            raise ConfigError("folds: at least one fold is required")

        if self.grid is not None:
            for axis, allowed in (
                ("regimes", REGIMES),
                ("orders", ORDERS),
                ("strategies", STRATEGIES),
                ("curricula", CURRICULA),
            ):
                bad = [v for v in getattr(self.grid, axis) if v not in allowed]
                if bad:
                    raise ConfigError(f"grid.{axis}: unknown value(s) {bad}")

    @property
    def variant_name(self) -> str:
        """Short identifier of the regime/order/strategy/curriculum combination."""
        if self.stream.regime == "cgen":
            return "cgen"
        parts = ["c2gen", str(self.stream.order), self.strategy.kind]
        if self.stream.curriculum != "none":
            parts.append(self.stream.curriculum)
        return "-".join(parts)

    def variants(self) -> List["ExperimentConfig"]:
        """Expand the grid axes into one config per variant (self when no grid)."""
        if self.grid is None:
            return [self]

        variants: List[ExperimentConfig] = []
        seen = set()
        for regime, order, kind, curriculum in itertools.product(
            self.grid.regimes, self.grid.orders, self.grid.strategies, self.grid.curricula
        ):
            if regime == "cgen":
                # Offline training has no order, memory or curriculum.
                order, kind, curriculum = None, "none", "none"
            stream = replace(self.stream, regime=regime, order=order, curriculum=curriculum)
            strategy = replace(self.strategy, kind=kind)
            variant = replace(self, stream=stream, strategy=strategy, grid=None)
            if variant.variant_name not in seen:
                seen.add(variant.variant_name)
                variants.append(variant)

        logger.info(f"Grid expanded to {len(variants)} variant(s)")
        return variants

    def resolve_output_dir(self, override: Optional[str] = None) -> Path:
        """Output directory: CLI override, then $C2GEN_OUT, then the config value."""
        if override:
            return Path(override)
        env = os.environ.get(OUTPUT_ENV_VAR)
        if env:
            return Path(env)
        return Path(self.output_dir)
