import numpy as np
import pytest

from pulsarcompat.catalog import load_full_catalog


@pytest.fixture(scope="session")
def catalog():
    return load_full_catalog("paper-2025")


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
