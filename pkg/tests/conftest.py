import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("numeric", deadline=None, max_examples=50)
settings.load_profile("numeric")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_masked_instance(rng, f, n, k, observed=0.7):
    """A positive data matrix, a mask with at least one observed entry, and
    strictly positive starting factors."""
    v = rng.random((f, n)) + 0.1
    mask = (rng.random((f, n)) < observed).astype(float)
    if not mask.any():
        mask.flat[0] = 1.0
    w = rng.random((f, k)) + 0.1
    h = rng.random((k, n)) + 0.1
    return v, mask, w, h
