"""Compiled update kernels: fused multiplicative-update sweeps.

Same API as ``atnmf._kernels_py``. Matrix products go through BLAS dgemm;
the elementwise mask/divide/clamp steps run as tight C loops, and the whole
inner loop executes without touching the interpreter.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

BACKEND = "c"


# BLAS is column-major; every helper below computes a product of C-order
# (row-major) arrays by evaluating the transposed identity C^T = B^T A^T.

cdef inline void _gemm_nn(double[:, ::1] a, double[:, ::1] b, double[:, ::1] c) noexcept nogil:
    # c (m x n) = a (m x k) @ b (k x n)
    cdef int m = <int> a.shape[0], k = <int> a.shape[1], n = <int> b.shape[1]
    cdef double one = 1.0, zero = 0.0
    cdef char nt = b'N'
    dgemm(&nt, &nt, &n, &m, &k, &one, &b[0, 0], &n, &a[0, 0], &k, &zero, &c[0, 0], &n)


cdef inline void _gemm_tn(double[:, ::1] a, double[:, ::1] b, double[:, ::1] c) noexcept nogil:
    # c (m x n) = a.T @ b with a (f x m), b (f x n)
    cdef int f = <int> a.shape[0], m = <int> a.shape[1], n = <int> b.shape[1]
    cdef double one = 1.0, zero = 0.0
    cdef char nt = b'N', tt = b'T'
    dgemm(&nt, &tt, &n, &m, &f, &one, &b[0, 0], &n, &a[0, 0], &m, &zero, &c[0, 0], &n)


cdef inline void _gemm_nt(double[:, ::1] a, double[:, ::1] b, double[:, ::1] c) noexcept nogil:
    # c (m x n) = a @ b.T with a (m x f), b (n x f)
    cdef int m = <int> a.shape[0], f = <int> a.shape[1], n = <int> b.shape[0]
    cdef double one = 1.0, zero = 0.0
    cdef char nt = b'N', tt = b'T'
    dgemm(&tt, &nt, &n, &m, &f, &one, &b[0, 0], &f, &a[0, 0], &f, &zero, &c[0, 0], &n)


cdef inline void _hadamard_mask(double[:, ::1] mask, double[:, ::1] src,
                                double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(src.shape[0]):
        for j in range(src.shape[1]):
            out[i, j] = mask[i, j] * src[i, j]


cdef inline void _mul_ratio(double[:, ::1] x, double[:, ::1] num,
                            double[:, ::1] den, double floor) noexcept nogil:
    # x *= num / max(den, floor)
    cdef Py_ssize_t i, j
    cdef double d
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            d = den[i, j]
            if d < floor:
                d = floor
            x[i, j] *= num[i, j] / d

cdef double _rel_change(double[:, ::1] a, double[:, ::1] b, double floor) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0, d, q
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            d = b[i, j]
            if d < floor:
                d = floor
            q = (a[i, j] - b[i, j]) / d
            s += q * q
    return sqrt(s)


cdef void _sweep(double[:, ::1] mu, double[:, ::1] mask,
                 double[:, ::1] w, double[:, ::1] h,
                 double[:, ::1] vhat_in, double[:, ::1] vhat_out,
                 double[:, ::1] t,
                 double[:, ::1] num_h, double[:, ::1] den_h,
                 double[:, ::1] num_w, double[:, ::1] den_w,
                 double floor) noexcept nogil:
    # vhat_in must hold w @ h on entry; vhat_out receives the post-sweep
    # reconstruction. The two may not alias.
    _hadamard_mask(mask, vhat_in, t)
    _gemm_tn(w, mu, num_h)
    _gemm_tn(w, t, den_h)
    _mul_ratio(h, num_h, den_h, floor)

    _gemm_nn(w, h, vhat_out)
    _hadamard_mask(mask, vhat_out, t)
    _gemm_nt(mu, h, num_w)
    _gemm_nt(t, h, den_w)
    _mul_ratio(w, num_w, den_w, floor)

    _gemm_nn(w, h, vhat_out)


def sweep(double[:, ::1] mu, double[:, ::1] mask,
          double[:, ::1] w, double[:, ::1] h, double floor,
          double[:, ::1] vhat):
    """One (coefficient, dictionary) update in place; returns the fresh
    reconstruction. ``vhat`` must equal ``w @ h`` on entry."""
    cdef Py_ssize_t f = mu.shape[0], n = mu.shape[1], k = w.shape[1]
    out = np.empty((f, n))
    t = np.empty((f, n))
    num_h = np.empty((k, n))
    den_h = np.empty((k, n))
    num_w = np.empty((f, k))
    den_w = np.empty((f, k))
    cdef double[:, ::1] out_v = out, t_v = t
    cdef double[:, ::1] nh = num_h, dh = den_h, nw = num_w, dw = den_w
    with nogil:
        _sweep(mu, mask, w, h, vhat, out_v, t_v, nh, dh, nw, dw, floor)
    return out


def inner_loop(double[:, ::1] mu, double[:, ::1] mask,
               double[:, ::1] w, double[:, ::1] h,
               double floor, double eps_in, int max_inner):
    """Sweep until the reconstruction's relative change drops below
    ``eps_in`` or ``max_inner`` sweeps have run.

    Returns ``(sweeps_used, vhat)``; ``w`` and ``h`` are updated in place.
    """
    cdef Py_ssize_t f = mu.shape[0], n = mu.shape[1], k = w.shape[1]
    vhat_a = np.empty((f, n))
    vhat_b = np.empty((f, n))
    t = np.empty((f, n))
    num_h = np.empty((k, n))
    den_h = np.empty((k, n))
    num_w = np.empty((f, k))
    den_w = np.empty((f, k))
    cdef double[:, ::1] va = vhat_a, vb = vhat_b, t_v = t
    cdef double[:, ::1] nh = num_h, dh = den_h, nw = num_w, dw = den_w
    cdef int it, used = 0
    cdef bint odd = 0
    cdef double rel
    with nogil:
        _gemm_nn(w, h, va)
        for it in range(max_inner):
            if odd:
                _sweep(mu, mask, w, h, vb, va, t_v, nh, dh, nw, dw, floor)
                rel = _rel_change(va, vb, floor)
            else:
                _sweep(mu, mask, w, h, va, vb, t_v, nh, dh, nw, dw, floor)
                rel = _rel_change(vb, va, floor)
            odd = not odd
            used = it + 1
            if rel < eps_in:
                break
    return used, (vhat_b if odd else vhat_a)


def update_r(double[:, ::1] v, double[:, ::1] vhat,
             double[:, ::1] mask, double lam):
    """Closed-form worst-case perturbation, clamped so v + r stays >= 0;
    zero on unobserved entries."""
    cdef Py_ssize_t i, j
    cdef double den = lam - 1.0, val
    out = np.empty((v.shape[0], v.shape[1]))
    cdef double[:, ::1] r = out
    with nogil:
        for i in range(v.shape[0]):
            for j in range(v.shape[1]):
                if mask[i, j] != 0.0:
                    val = (v[i, j] - vhat[i, j]) / den
                    if val < -v[i, j]:
                        val = -v[i, j]
                    r[i, j] = val
                else:
                    r[i, j] = 0.0
    return out


def relative_change(double[:, ::1] vhat_new, double[:, ::1] vhat_old, double floor):
    """Frobenius norm of the elementwise quotient (new - old) / max(old, floor)."""
    cdef double out
    with nogil:
        out = _rel_change(vhat_new, vhat_old, floor)
    return out
