import numpy as np
import pytest

from gaussbv import fields


@pytest.fixture(scope="session")
def grid1():
    return fields.uniform_grid(1, 513)


@pytest.fixture(scope="session")
def grid1_half():
    """1-D grid with the origin midway between nodes."""
    return fields.uniform_grid(1, 513, align=0.0)


@pytest.fixture(scope="session")
def grid2():
    return fields.uniform_grid(2, 257)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
