"""Shared fixtures: a tiny configuration and the data built from it."""

from pathlib import Path

import pytest

from c2gen.config import ExperimentConfig, make_rng
from c2gen.generation.compositional import build_dataset
from c2gen.generation.splits import ninefold_split
from c2gen.models import CompType
from c2gen.network.params import init_params
from c2gen.network.vocab import Vocabulary

DATA_DIR = Path(__file__).parent / "data"
TINY_CONFIG = DATA_DIR / "tiny_config.yaml"


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    return ExperimentConfig.load(TINY_CONFIG)


@pytest.fixture(scope="module")
def tiny_dataset():
    return build_dataset(ExperimentConfig.load(TINY_CONFIG), seed=1)


@pytest.fixture(scope="module")
def tiny_lexicon(tiny_dataset):
    return tiny_dataset.lexicon


@pytest.fixture(scope="module")
def tiny_split(tiny_dataset):
    return ninefold_split(
        tiny_dataset.instances,
        CompType.from_code("+e"),
        tiny_dataset.lexicon,
        make_rng(1, "split"),
    )


@pytest.fixture(scope="module")
def tiny_vocab(tiny_lexicon):
    return Vocabulary.from_tokens(tiny_lexicon.tokens())


@pytest.fixture
def tiny_params(tiny_vocab):
    config = ExperimentConfig.load(TINY_CONFIG)
    return init_params(tiny_vocab, config.model, make_rng(1, "init"))
