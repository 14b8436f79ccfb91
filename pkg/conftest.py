"""Shared pytest fixtures."""

import numpy as np
import pytest


@pytest.fixture
def rng():
    """Fixed-seed generator so every test run sees the same samples."""
    return np.random.default_rng(12345)


@pytest.fixture
def spd(rng):
    """Factory for random SPD matrices of a given size."""
    from utils.rng import random_spd

    return lambda dim: random_spd(rng, dim)
