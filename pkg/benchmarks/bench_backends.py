"""Compare the compiled and numpy update kernels.

Times raw multiplicative sweeps and a full adversarial solve on the default
synthetic protocol sizes. Run from the repo root:

    python benchmarks/bench_backends.py [--f 100 --n 50 --k 5]
"""

import argparse
import time

import numpy as np

from atnmf import _kernels_py
from atnmf.sampling import holdout_rng, synth_rng
from atnmf.evaluate import holdout_split
from atnmf.solver import SolverConfig
from atnmf.synth import SyntheticSpec, generate_synthetic

try:
    from atnmf import _kernels_c
except ImportError:
    _kernels_c = None


def time_sweeps(kernels, v, mask, k, sweeps, seed=0):
    rng = np.random.default_rng(seed)
    f, n = v.shape
    w = rng.random((f, k)) + 0.5
    h = rng.random((k, n)) + 0.5
    mu = mask * v
    vhat = w @ h
    start = time.perf_counter()
    for _ in range(sweeps):
        vhat = kernels.sweep(mu, mask, w, h, 1e-12, vhat)
    return time.perf_counter() - start


def time_solve(kernels, v, mask, cfg, seed=0):
    # Drive the loop the way the solver does, pinned to one kernel module.
    rng = np.random.default_rng(seed)
    f, n = v.shape
    w = np.abs(rng.normal(size=(f, cfg.k)))
    h = np.abs(rng.normal(size=(cfg.k, n)))
    start = time.perf_counter()
    vhat = w @ h
    prev = None
    total_sweeps = 0
    for _ in range(cfg.max_outer):
        r = kernels.update_r(v, vhat, mask, cfg.lam)
        mu = mask * (v + r)
        iters, vhat = kernels.inner_loop(mu, mask, w, h, cfg.div_floor, cfg.eps_in, cfg.max_inner)
        total_sweeps += iters
        if prev is not None and kernels.relative_change(vhat, prev, cfg.div_floor) < cfg.eps_out:
            break
        prev = vhat
    return time.perf_counter() - start, total_sweeps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--f", type=int, default=100)
    parser.add_argument("--n", type=int, default=50)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--sweeps", type=int, default=2000)
    parser.add_argument("--alpha", type=float, default=0.5)
    args = parser.parse_args()

    spec = SyntheticSpec(f=args.f, n=args.n, k=args.k)
    v, _ = generate_synthetic(spec, synth_rng(1))
    mask = holdout_split(args.f, args.n, args.alpha, holdout_rng(1)).mask
    cfg = SolverConfig(k=args.k, lam=3.0)

    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("c", _kernels_c))
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    print(f"matrix {args.f}x{args.n}, rank {args.k}, alpha {args.alpha}")
    print(f"{'backend':<8} {'us/sweep':>10} {'solve (ms)':>12} {'sweeps':>8}")
    results = {}
    for name, kernels in backends:
        time_sweeps(kernels, v, mask, args.k, 50)  # warm up
        per_sweep = time_sweeps(kernels, v, mask, args.k, args.sweeps) / args.sweeps
        solve_time, total_sweeps = time_solve(kernels, v, mask, cfg)
        results[name] = per_sweep
        print(f"{name:<8} {per_sweep * 1e6:>10.2f} {solve_time * 1e3:>12.2f} {total_sweeps:>8}")
    if len(results) == 2:
        print(f"speedup (python / c): {results['python'] / results['c']:.2f}x")


if __name__ == "__main__":
    main()
