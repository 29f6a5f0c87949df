import numpy as np
import pytest

from absadmm.datasets import Dataset


def _classification(n, d, seed, scale=1.0, flip=0.0):
    """Linearly separable-ish binary data with optional label noise."""
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(d)
    feats = scale * rng.standard_normal((n, d))
    labels = np.sign(feats @ w + 0.5 * rng.standard_normal(n))
    labels[labels == 0] = 1.0
    if flip > 0.0:
        mask = rng.random(n) < flip
        labels[mask] *= -1.0
    return Dataset(feats, labels)


@pytest.fixture
def make_dataset():
    return _classification


@pytest.fixture
def tiny_dataset():
    return _classification(60, 8, seed=11)
