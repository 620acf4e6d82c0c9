from typing import Callable

import numpy as np
import pytest

from lamlen.config import Config
from lamlen.models import Criterion, ExperimentConfig, SummaryReport
from lamlen.sampling import RandomStream
from lamlen.stats import MomentEstimate


@pytest.fixture
def stream() -> RandomStream:
    return RandomStream(42)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def temp_config(tmp_path) -> Config:
    """A Config stored under tmp_path instead of the home directory"""
    return Config(config_dir=tmp_path / ".lamlen")


@pytest.fixture
def make_config(tmp_path) -> Callable[..., ExperimentConfig]:
    """Small experiment configurations writing into tmp_path"""

    def make(experiment: str, **params) -> ExperimentConfig:
        params.setdefault("output_dir", str(tmp_path / "out"))
        params.setdefault("jobs", 1)
        return ExperimentConfig(experiment, **params)

    return make


@pytest.fixture
def passing_report() -> SummaryReport:
    return SummaryReport(
        "E1",
        42,
        1000,
        [Criterion("ks_P", 0.001, 0.005), Criterion("mean", 1.0962, 0.003, target=1.09614)],
        [MomentEstimate(1, 1.0962, 0.001, 1.09614)],
        {"fraction_above_one": 0.318},
    )


@pytest.fixture
def failing_report() -> SummaryReport:
    return SummaryReport("E1", 42, 1000, [Criterion("ks_P", 0.2, 0.005)])
