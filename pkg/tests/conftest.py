import sys
from pathlib import Path

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from a3s import Dataset, NeighborGraph, PairProbabilityStore

hypothesis.settings.register_profile(
    "suite", max_examples=50, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("suite")


def store_from_probs(n: int, probs: dict[tuple[int, int], float],
                     epsilon: float = 1e-4) -> PairProbabilityStore:
    """Hand-built sparse store for strategy/purity tests."""
    if probs:
        s = np.array([min(a, b) for a, b in probs], dtype=np.int64)
        t = np.array([max(a, b) for a, b in probs], dtype=np.int64)
        p = np.array(list(probs.values()), dtype=np.float64)
    else:
        s = t = np.empty(0, dtype=np.int64)
        p = np.empty(0, dtype=np.float64)
    return PairProbabilityStore(n, s, t, p, epsilon)


@pytest.fixture
def two_blob_dataset():
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 0.5, size=(30, 3))
    b = rng.normal(0.0, 0.5, size=(30, 3)) + 12.0
    X = np.vstack([a, b])
    y = np.repeat([0, 1], 30)
    return Dataset(X, labels=y)


@pytest.fixture
def small_random_dataset():
    rng = np.random.default_rng(11)
    return Dataset(rng.normal(size=(24, 4)), labels=rng.integers(0, 3, size=24))
