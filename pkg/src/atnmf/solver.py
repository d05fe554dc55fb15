"""Masked multiplicative-update solvers.

Two entry points share one nested loop: :func:`at_nmf` alternates a
closed-form worst-case data perturbation with multiplicative factor
updates on the perturbed data, and :func:`standard_nmf` runs the same loop
with the perturbation frozen at zero, so both use identical stopping
semantics. Missing entries are handled by a binary observation mask: the
losses and the factor updates only ever touch observed entries.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import matrix
from .backend import kernels
from .errors import DimensionError, InvalidConfigError
from .sampling import sample_half_normal_matrix


@dataclass(frozen=True)
class SolverConfig:
    """Solve parameters.

    ``lam`` trades off the adversary's power: large values shrink the
    perturbation toward zero (recovering the plain baseline), values near 1
    make it strong. Values at or below 1 are rejected because the inner
    maximization becomes unbounded (lam < 1) or degenerate (lam = 1).
    ``lam`` may be left as None for baseline-only use.
    """

    k: int
    lam: float | None = None
    eps_in: float = 0.01
    eps_out: float = 0.01
    max_inner: int = 1000
    max_outer: int = 100
    init_mm_steps: int = 5
    div_floor: float = 1e-12

    def __post_init__(self):
        if self.k < 1:
            raise InvalidConfigError(f"k must be a positive integer, got {self.k}")
        if self.lam is not None and not self.lam > 1.0:
            raise InvalidConfigError(
                f"lambda must be strictly greater than 1, got {self.lam}; "
                "at 1 the perturbation subproblem degenerates and below 1 "
                "it is unbounded"
            )
        if self.eps_in <= 0 or self.eps_out <= 0:
            raise InvalidConfigError("eps_in and eps_out must be positive")
        if self.max_inner < 1 or self.max_outer < 1:
            raise InvalidConfigError("max_inner and max_outer must be >= 1")
        if self.init_mm_steps < 0:
            raise InvalidConfigError("init_mm_steps must be >= 0")
        if self.div_floor <= 0:
            raise InvalidConfigError("div_floor must be positive")


@dataclass(frozen=True)
class TraceRecord:
    """Diagnostics captured at the end of one outer iteration."""

    outer: int
    inner_iters: int
    objective: float
    fit: float
    r_norm_sq: float


@dataclass(frozen=True)
class SolveResult:
    w: np.ndarray
    h: np.ndarray
    r: np.ndarray | None
    trace: tuple[TraceRecord, ...]

    def reconstruction(self):
        return self.w @ self.h


def _check_pair_shapes(u, mask, w, h):
    if mask.shape != u.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match data shape {u.shape}")
    f, n = u.shape
    if w.ndim != 2 or h.ndim != 2 or w.shape[1] != h.shape[0]:
        raise DimensionError(f"factor shapes {w.shape} and {h.shape} are not conformable")
    if w.shape[0] != f or h.shape[1] != n:
        raise DimensionError(
            f"factors {w.shape} x {h.shape} do not reconstruct a {u.shape} matrix"
        )


def mm_update_h(u, mask, w, h, floor=matrix.DIV_FLOOR):
    """Multiplicative coefficient update against effective data ``u``.

    Masked form of H <- H .* (W^T U) / (W^T W H); with a full mask the two
    coincide. Preserves nonnegativity and exact zeros of H.
    """
    _check_pair_shapes(u, mask, w, h)
    num = w.T @ (mask * u)
    den = w.T @ (mask * (w @ h))
    return h * (num / np.maximum(den, floor))


def mm_update_w(u, mask, w, h, floor=matrix.DIV_FLOOR):
    """Multiplicative dictionary update, the transpose-symmetric mirror of
    :func:`mm_update_h`."""
    _check_pair_shapes(u, mask, w, h)
    num = (mask * u) @ h.T
    den = (mask * (w @ h)) @ h.T
    return w * (num / np.maximum(den, floor))


def update_r(v, vhat, mask, lam):
    """Worst-case data perturbation for fixed factors.

    Elementwise max((v - vhat) / (lam - 1), -v) on observed entries, zero
    elsewhere; the clamp keeps v + r nonnegative.
    """
    if lam is None or not lam > 1.0:
        raise InvalidConfigError(f"lambda must be strictly greater than 1, got {lam}")
    if vhat.shape != v.shape:
        raise DimensionError(f"shape mismatch: {v.shape} vs {vhat.shape}")
    if mask.shape != v.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match data shape {v.shape}")
    return kernels.update_r(v, vhat, mask, float(lam))


def scalar_r_oracle(v, vhat, lam, tol=1e-9):
    """Numerical minimizer of (lam-1) r^2 - 2 r (v - vhat) over r >= -v.

    Bracket expansion plus golden-section search. Deliberately independent
    of the closed form in :func:`update_r` so it can serve as a test oracle.
    """
    if not lam > 1.0:
        raise InvalidConfigError(f"lambda must be strictly greater than 1, got {lam}")

    def phi(r):
        return (lam - 1.0) * r * r - 2.0 * r * (v - vhat)

    lo = -float(v)
    step = 1.0 + abs(v) + abs(vhat)
    hi = lo + step
    while phi(hi + step) < phi(hi):
        hi += step
        step *= 2.0
    hi += step

    inv_gold = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - inv_gold * (b - a)
    x2 = a + inv_gold * (b - a)
    f1, f2 = phi(x1), phi(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_gold * (b - a)
            f1 = phi(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_gold * (b - a)
            f2 = phi(x2)
    xm = 0.5 * (a + b)

    # One parabolic refinement at wide spacing; near-flat minima leave the
    # golden-section comparisons to floating-point noise, while the parabola
    # vertex through well-separated samples stays accurate. The vertex of
    # the unconstrained objective is clipped back to the feasible bracket.
    h = 1e-3 * (1.0 + abs(xm))
    f_left, f_mid, f_right = phi(xm - h), phi(xm), phi(xm + h)
    curvature = f_left - 2.0 * f_mid + f_right
    if curvature > 0.0:
        xm -= h * 0.5 * (f_right - f_left) / curvature
    return min(max(xm, lo), hi)


def relative_change(vhat_new, vhat_old, floor=matrix.DIV_FLOOR):
    """Stopping statistic: || (new - old) / max(old, floor) ||_F."""
    if vhat_new.shape != vhat_old.shape:
        raise DimensionError(f"shape mismatch: {vhat_new.shape} vs {vhat_old.shape}")
    return kernels.relative_change(vhat_new, vhat_old, floor)


def objective(v, r, w, h, mask, lam):
    """Adversarially regularized loss over observed entries:
    ||M .* (V + R - WH)||_F^2 - lam * ||M .* R||_F^2."""
    _check_pair_shapes(v, mask, w, h)
    if r.shape != v.shape:
        raise DimensionError(f"shape mismatch: {v.shape} vs {r.shape}")
    resid = mask * (v + r - w @ h)
    return matrix.frobenius_sq(resid) - lam * matrix.frobenius_sq(mask * r)


def init_factors(v, mask, cfg, rng):
    """Warm-started nonnegative factors.

    Entries are drawn Half-Normal with precision 1, then refined with
    ``cfg.init_mm_steps`` masked multiplicative sweeps against ``v`` so the
    initial reconstruction roughly tracks the data. Without that refinement
    a strong adversary can null the entire data matrix on the first
    perturbation update.
    """
    v = matrix.as_nonneg_matrix(v, "v")
    mask = matrix.as_mask(mask, v.shape, require_observed=True)
    f, n = v.shape
    w = sample_half_normal_matrix(rng, f, cfg.k, gamma=1.0)
    h = sample_half_normal_matrix(rng, cfg.k, n, gamma=1.0)
    if cfg.init_mm_steps > 0:
        mu = mask * v
        vhat = w @ h
        for _ in range(cfg.init_mm_steps):
            vhat = kernels.sweep(mu, mask, w, h, cfg.div_floor, vhat)
    return w, h


def _run(v, mask, cfg, rng, adversarial):
    v = matrix.as_nonneg_matrix(v, "v")
    mask = matrix.as_mask(mask, v.shape, require_observed=True)
    if adversarial and cfg.lam is None:
        raise InvalidConfigError("lambda is required for the adversarial solver")
    lam = float(cfg.lam) if adversarial else None

    w, h = init_factors(v, mask, cfg, rng)
    vhat = w @ h
    floor = cfg.div_floor
    mu_plain = mask * v
    r = None
    trace = []
    prev_vhat = None
    for outer in range(1, cfg.max_outer + 1):
        if adversarial:
            r = kernels.update_r(v, vhat, mask, lam)
            mu = mask * (v + r)
        else:
            mu = mu_plain
        inner_iters, vhat = kernels.inner_loop(
            mu, mask, w, h, floor, cfg.eps_in, cfg.max_inner
        )
        fit = matrix.frobenius_sq(mu - mask * vhat)
        r_sq = matrix.frobenius_sq(r) if adversarial else 0.0
        obj = fit - lam * r_sq if adversarial else fit
        trace.append(TraceRecord(outer, inner_iters, obj, fit, r_sq))
        if prev_vhat is not None and kernels.relative_change(vhat, prev_vhat, floor) < cfg.eps_out:
            break
        prev_vhat = vhat
    return SolveResult(w=w, h=h, r=r, trace=tuple(trace))


def standard_nmf(v, mask, cfg, rng):
    """Masked baseline factorization; ``cfg.lam`` is ignored.

    Runs the same nested loop as :func:`at_nmf` with the perturbation frozen
    at zero, so the two solvers stop under identical criteria.
    """
    return _run(v, mask, cfg, rng, adversarial=False)


def at_nmf(v, mask, cfg, rng):
    """Adversarially trained factorization.

    Each outer iteration refreshes the worst-case perturbation ``r`` from
    the current reconstruction, then runs multiplicative sweeps on the
    perturbed data ``v + r`` until the inner stopping rule fires. The outer
    loop stops once reconstructions at the end of consecutive outer
    iterations agree to within ``eps_out`` (checked from the second outer
    iteration on, when two such snapshots exist).
    """
    return _run(v, mask, cfg, rng, adversarial=True)
