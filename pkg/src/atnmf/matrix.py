"""Dense matrix helpers: validation, elementwise arithmetic, masking, norms.

All matrices are 2-D C-contiguous float64 numpy arrays. Observation masks
are float64 arrays of 0.0/1.0 so they can be used directly in elementwise
products without casting.
"""

import numpy as np

from .errors import DimensionError, InvalidInputError

DIV_FLOOR = 1e-12


def as_matrix(a, name="matrix"):
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be 2-D with at least one row and column, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidInputError(f"{name} contains NaN or infinite entries")
    return m


def as_nonneg_matrix(a, name="matrix"):
    """Like :func:`as_matrix` but additionally requires every entry >= 0."""
    m = as_matrix(a, name)
    if (m < 0).any():
        raise InvalidInputError(f"{name} contains negative entries")
    return m


def as_mask(m, shape=None, name="mask", require_observed=False):
    """Validate an observation mask (1 = observed): binary entries, optional
    shape check. Returns a float64 array of 0.0/1.0.

    The solver passes ``require_observed=True``: training on an all-zero
    mask is refused there, while plain masking of a matrix allows it.
    """
    out = as_matrix(m, name)
    if not ((out == 0.0) | (out == 1.0)).all():
        raise InvalidInputError(f"{name} entries must be 0 or 1")
    if shape is not None and out.shape != tuple(shape):
        raise DimensionError(f"{name} shape {out.shape} does not match data shape {tuple(shape)}")
    if require_observed and not out.any():
        raise InvalidInputError(f"{name} observes no entries (all zeros)")
    return out


def full_mask(rows, cols):
    """Mask observing every entry."""
    return np.ones((rows, cols), dtype=np.float64)


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def elementwise_mul(a, b):
    """Hadamard product of two equally shaped matrices."""
    _check_same_shape(a, b)
    return a * b


def elementwise_div(a, b, floor=DIV_FLOOR):
    """Elementwise a / max(b, floor); the floor guards zero denominators."""
    if floor <= 0:
        raise InvalidInputError(f"floor must be positive, got {floor}")
    _check_same_shape(a, b)
    return a / np.maximum(b, floor)


def frobenius_sq(a):
    """Squared Frobenius norm, sum of squared entries."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.dot(a.ravel(), a.ravel()))


def masked(a, mask):
    """Zero out unobserved entries: a[i,j] if mask[i,j]==1 else 0."""
    _check_same_shape(a, mask)
    return a * mask


def matmul(a, b):
    """Matrix product with an explicit conformability check."""
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b
