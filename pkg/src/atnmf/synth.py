"""Synthetic low-rank data: inverse-Gamma component precisions, Half-Normal
factors, exact product."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .sampling import sample_half_normal_matrix, sample_inverse_gamma


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator dimensions and the inverse-Gamma hyperparameters for the
    per-component precisions."""

    f: int = 100
    n: int = 50
    k: int = 5
    a: float = 50.0
    b: float = 70.0

    def __post_init__(self):
        if self.f < 1 or self.n < 1 or self.k < 1:
            raise InvalidConfigError(f"dimensions must be >= 1, got f={self.f} n={self.n} k={self.k}")
        if self.a <= 1:
            raise InvalidConfigError(f"shape a must exceed 1, got {self.a}")
        if self.b <= 0:
            raise InvalidConfigError(f"scale b must be positive, got {self.b}")


def generate_synthetic(spec, rng):
    """Draw (v, (w, h)) with v = w @ h exactly.

    One precision gamma_k is drawn per component from
    inverse-Gamma(spec.a, spec.b); column k of w and row k of h are then
    sampled entrywise Half-Normal sharing that gamma_k. The ground-truth
    factors are returned for diagnostics.
    """
    w = np.empty((spec.f, spec.k))
    h = np.empty((spec.k, spec.n))
    for k in range(spec.k):
        gamma_k = sample_inverse_gamma(rng, spec.a, spec.b)
        w[:, k] = sample_half_normal_matrix(rng, spec.f, 1, gamma=gamma_k)[:, 0]
        h[k, :] = sample_half_normal_matrix(rng, 1, spec.n, gamma=gamma_k)[0, :]
    v = w @ h
    return v, (w, h)
