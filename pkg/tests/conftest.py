import numpy as np
import pytest

from ordcd.dataset import OrdinalDataset
from ordcd.simulate import fig1_model, sample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fig1_large():
    """n = 100,000 draw from the three-level X -> Y example (fixed seed)."""
    return sample(fig1_model(), 100_000, np.random.default_rng(2024))


@pytest.fixture(scope="session")
def fig1_10k():
    return sample(fig1_model(), 10_000, np.random.default_rng(7))


def make_data(columns, levels=None, names=None):
    values = np.column_stack([np.asarray(c) for c in columns])
    if levels is None:
        levels = tuple(int(values[:, j].max()) for j in range(values.shape[1]))
    return OrdinalDataset(values, levels, names or tuple(f"X{j + 1}" for j in range(values.shape[1])))
