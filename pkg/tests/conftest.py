from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fdaclust.synth import CohortSpec, generate_cohort

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
TABLE_FILES = ("table6", "table7", "table8", "table9a", "table9b", "table9c", "table9d")


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def default_cohort():
    return generate_cohort(CohortSpec())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
