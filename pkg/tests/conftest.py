import numpy as np
import pytest

from maxboot.rng import SeedSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def seed(*keys: int) -> SeedSpec:
    """Shorthand for a fixed test stream."""
    return SeedSpec(987654321, 0).child(*keys)
