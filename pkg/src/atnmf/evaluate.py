"""Hold-out evaluation: random entry splits, RMSE over the held-out set,
and mean/std aggregation over independent solver restarts."""

import math
from dataclasses import dataclass

import numpy as np

from . import matrix
from .errors import InvalidConfigError, InvalidInputError
from .sampling import holdout_rng, restart_rng
from .solver import at_nmf, standard_nmf

METHODS = ("nmf", "atnmf")


@dataclass(frozen=True)
class HoldoutSplit:
    """Training mask (1 = observed) plus the held-out (row, col) index set."""

    mask: np.ndarray
    indices: np.ndarray
    alpha: float


@dataclass(frozen=True)
class RunSummary:
    """Aggregated prediction error for one (dataset, alpha, method, lambda) cell."""

    method: str
    lam: float | None
    alpha: float
    k: int
    restarts: int
    base_seed: int
    rmse_values: tuple[float, ...]
    rmse_mean: float
    rmse_std: float
    traces: tuple | None = None


def holdout_count(f, n, alpha):
    """Number of held-out entries: alpha * f * n rounded half away from zero."""
    return int(math.floor(alpha * f * n + 0.5))


def holdout_split(f, n, alpha, rng):
    """Uniform random hold-out of round(alpha * f * n) entries.

    Deterministic given the generator state; the held-out indices are
    returned in draw order as an (m, 2) integer array.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    count = holdout_count(f, n, alpha)
    if count >= f * n:
        raise InvalidInputError(f"alpha={alpha} would hold out every entry of a {f}x{n} matrix")
    flat = rng.permutation(f * n)[:count]
    mask = np.ones(f * n)
    mask[flat] = 0.0
    indices = np.stack([flat // n, flat % n], axis=1).astype(np.int64)
    return HoldoutSplit(mask=mask.reshape(f, n), indices=indices, alpha=float(alpha))


def rmse(v, vhat, indices):
    """Root mean-squared error of vhat against v over the held-out indices."""
    if vhat.shape != v.shape:
        raise InvalidInputError(f"shape mismatch: {v.shape} vs {vhat.shape}")
    indices = np.asarray(indices)
    if indices.size == 0:
        raise InvalidInputError("held-out index set is empty")
    rows, cols = indices[:, 0], indices[:, 1]
    d = v[rows, cols] - vhat[rows, cols]
    return float(np.sqrt(np.mean(d * d)))


def run_experiment(v, alpha, method, cfg, restarts, base_seed, keep_traces=False):
    """Run one experiment cell and aggregate RMSE over restarts.

    The hold-out split depends only on (shape of v, alpha, base_seed), so
    every method and restart trains on identical data; restart r draws its
    initialization from stream (base_seed, r). The standard deviation uses
    the (n-1) sample convention and is reported as 0 for a single restart.
    """
    if method not in METHODS:
        raise InvalidConfigError(f"method must be one of {METHODS}, got {method!r}")
    if restarts < 1:
        raise InvalidConfigError(f"restarts must be >= 1, got {restarts}")
    v = matrix.as_nonneg_matrix(v, "v")
    f, n = v.shape
    split = holdout_split(f, n, alpha, holdout_rng(base_seed))
    solve = at_nmf if method == "atnmf" else standard_nmf

    values = []
    traces = []
    for idx in range(restarts):
        try:
            result = solve(v, split.mask, cfg, restart_rng(base_seed, idx))
        except Exception as e:
            e.args = (f"restart {idx}: {e}",)
            raise
        values.append(rmse(v, result.reconstruction(), split.indices))
        if keep_traces:
            traces.append(result.trace)

    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if restarts > 1 else 0.0
    return RunSummary(
        method=method,
        lam=cfg.lam if method == "atnmf" else None,
        alpha=float(alpha),
        k=cfg.k,
        restarts=restarts,
        base_seed=int(base_seed),
        rmse_values=tuple(values),
        rmse_mean=mean,
        rmse_std=std,
        traces=tuple(traces) if keep_traces else None,
    )
