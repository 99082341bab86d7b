from pathlib import Path

import numpy as np
import pytest

from core.instances import make_rng

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240611)
