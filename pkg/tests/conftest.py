import os

import numpy as np
import pytest
from unittest.mock import patch

from semigroup_calculus.algebra import TimeGrid
from semigroup_calculus.backends import (
    DiagonalBackend, MatrixExpBackend, NilpotentShiftBackend, random_stable_matrix
)
from semigroup_calculus.config import Settings


@pytest.fixture(autouse=True)
def isolated_environment(tmp_path):
    """Keep SEMIGROUP_* variables and config files of the host out of every test."""
    clean = {k: v for k, v in os.environ.items() if not k.startswith("SEMIGROUP_")}
    clean["SEMIGROUP_CONFIG"] = str(tmp_path / "config.json")
    with patch.dict(os.environ, clean, clear=True), \
            patch("semigroup_calculus.config.load_dotenv"):
        yield


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def grid(settings):
    return TimeGrid.from_settings(settings)


@pytest.fixture
def coarse_grid():
    """Small grid for property tests that build many grid functions."""
    return TimeGrid.from_horizon(2.0 ** -6, 16.0)


@pytest.fixture
def diag():
    return DiagonalBackend(np.array([-1.0, -2.0]))


@pytest.fixture
def nilshift():
    return NilpotentShiftBackend(8, 0.125)


@pytest.fixture
def stable_backend():
    return MatrixExpBackend(random_stable_matrix(np.random.default_rng(3)))


@pytest.fixture(scope="session")
def random_backends():
    rng = np.random.default_rng(2024)
    return [MatrixExpBackend(random_stable_matrix(rng)) for _ in range(20)]
