"""Shared test fixtures and configuration."""

from pathlib import Path

import numpy as np
import pytest

from surit.config import ExperimentConfig, settings
from surit.data import TRAIN, build_corpus, generate_dataset, generate_mixture, save_dataset
from surit.inventory import SpeakerInventory
from surit.neural import init_params


@pytest.fixture(autouse=True)
def no_log_files():
    """Keep test runs from writing rotating log files into the working tree."""
    previous = settings.log_to_file
    settings.log_to_file = False
    yield
    settings.log_to_file = previous


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    """Smallest accepted model and corpus."""
    return ExperimentConfig.tiny(seed=0)


@pytest.fixture
def tiny_params(tiny_config):
    return init_params(tiny_config, tiny_config.seed)


@pytest.fixture
def tiny_sample(tiny_config):
    corpus = build_corpus(tiny_config.data, tiny_config.seed)
    return generate_mixture(corpus, TRAIN, 0)


@pytest.fixture
def tiny_dataset(tiny_config):
    return generate_dataset(tiny_config)


@pytest.fixture
def tiny_data_dir(tiny_dataset, tmp_path) -> Path:
    """A saved tiny dataset directory."""
    out = tmp_path / "data"
    save_dataset(tiny_dataset, out)
    return out


@pytest.fixture
def two_speaker_inventory() -> SpeakerInventory:
    return SpeakerInventory(labels=(7, 3), embeddings=np.eye(2))
