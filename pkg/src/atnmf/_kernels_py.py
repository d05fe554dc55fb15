"""Numpy implementation of the hot update kernels.

The compiled module ``atnmf._kernels_c`` mirrors this API; ``atnmf.backend``
picks one at import time. Both operate on C-contiguous float64 arrays and
mutate the factor matrices in place.

Conventions: ``mu`` is the pre-masked effective data ``mask * u``; masks are
float64 arrays of 0.0/1.0; ``floor`` guards denominators of elementwise
divisions.
"""

import numpy as np

BACKEND = "python"


def sweep(mu, mask, w, h, floor, vhat):
    """One multiplicative sweep (coefficient update, then dictionary update).

    ``vhat`` must equal ``w @ h`` on entry. Updates ``w`` and ``h`` in place
    and returns the fresh reconstruction after both updates.
    """
    t = mask * vhat
    h *= (w.T @ mu) / np.maximum(w.T @ t, floor)
    t = mask * (w @ h)
    w *= (mu @ h.T) / np.maximum(t @ h.T, floor)
    return w @ h


def inner_loop(mu, mask, w, h, floor, eps_in, max_inner):
    """Sweep until the relative change of the reconstruction drops below
    ``eps_in`` or ``max_inner`` sweeps have run.

    Returns ``(sweeps_used, vhat)``; ``w`` and ``h`` are updated in place.
    """
    vhat = w @ h
    for i in range(1, max_inner + 1):
        vhat_new = sweep(mu, mask, w, h, floor, vhat)
        rel = relative_change(vhat_new, vhat, floor)
        vhat = vhat_new
        if rel < eps_in:
            return i, vhat
    return max_inner, vhat


def update_r(v, vhat, mask, lam):
    """Closed-form worst-case perturbation, clamped so v + r stays >= 0.

    Observed entries get max((v - vhat) / (lam - 1), -v); unobserved entries
    are exactly zero.
    """
    return mask * np.maximum((v - vhat) / (lam - 1.0), -v)


def relative_change(vhat_new, vhat_old, floor):
    """Frobenius norm of the elementwise quotient (new - old) / max(old, floor)."""
    q = (vhat_new - vhat_old) / np.maximum(vhat_old, floor)
    q = q.ravel()
    return float(np.sqrt(np.dot(q, q)))
