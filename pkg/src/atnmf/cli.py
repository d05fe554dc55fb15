"""Command-line interface.

Three subcommands: ``synth`` writes a synthetic dataset, ``solve`` runs one
factorization and writes the factors plus a loss trace, ``experiment`` runs
a (dataset, alpha, method, lambda) grid from a config file and writes CSV
summaries. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

Experiment configs are flat key-value text: one ``key = value`` pair per
line, lists comma-separated, ``#`` comments. The effective config (defaults
filled in) is echoed next to the results so a run can be reproduced from
its own output. ``ATNMF_THREADS`` caps the experiment worker pool.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .datasets import DatasetDescriptor, load_dataset, write_dense
from .errors import DimensionError, InvalidConfigError, InvalidInputError, ParseError
from .evaluate import METHODS, run_experiment
from .sampling import restart_rng, synth_rng
from .solver import SolverConfig, at_nmf, standard_nmf
from .synth import SyntheticSpec, generate_synthetic

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _fmt(x):
    """Shortest round-trip decimal for a float, plain text for the rest."""
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


# ---------------------------------------------------------------------------
# synth

def _cmd_synth(args):
    spec = SyntheticSpec(f=args.f, n=args.n, k=args.k, a=args.a, b=args.b)
    v, (w, h) = generate_synthetic(spec, synth_rng(args.seed))
    write_dense(args.out, v, comment=f"synthetic f={spec.f} n={spec.n} k={spec.k} seed={args.seed}")
    if args.ground_truth:
        base, ext = os.path.splitext(args.out)
        write_dense(f"{base}_w{ext or '.txt'}", w, comment="ground-truth dictionary")
        write_dense(f"{base}_h{ext or '.txt'}", h, comment="ground-truth coefficients")
    print(f"wrote {spec.f}x{spec.n} matrix to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve

def _descriptor_from_args(args):
    return DatasetDescriptor(
        kind=args.kind,
        path=args.data,
        normalization=args.normalization,
        bands=args.bands,
        width=args.width,
        height=args.height,
    )


def _write_trace(path, trace):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["outer", "inner_iters", "objective", "fit", "r_norm_sq"])
        for rec in trace:
            out.writerow([rec.outer, rec.inner_iters, _fmt(rec.objective), _fmt(rec.fit), _fmt(rec.r_norm_sq)])


def _cmd_solve(args):
    v = load_dataset(_descriptor_from_args(args))
    cfg = SolverConfig(
        k=args.k,
        lam=args.lam,
        eps_in=args.eps_in,
        eps_out=args.eps_out,
        max_inner=args.max_inner,
        max_outer=args.max_outer,
    )
    mask = np.ones_like(v)
    rng = restart_rng(args.seed, 0)
    if args.method == "atnmf":
        if args.lam is None:
            raise InvalidConfigError("--lambda is required for method 'atnmf'")
        result = at_nmf(v, mask, cfg, rng)
    else:
        result = standard_nmf(v, mask, cfg, rng)

    os.makedirs(args.out, exist_ok=True)
    write_dense(os.path.join(args.out, "w.txt"), result.w)
    write_dense(os.path.join(args.out, "h.txt"), result.h)
    if result.r is not None:
        write_dense(os.path.join(args.out, "r.txt"), result.r)
    _write_trace(os.path.join(args.out, "trace.csv"), result.trace)
    last = result.trace[-1]
    print(
        f"{args.method} finished: {len(result.trace)} outer iterations, "
        f"final fit {last.fit:.6g} (outputs in {args.out})"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment config

_CONFIG_DEFAULTS = {
    "dataset": "synthetic",
    "normalization": "none",
    "bands": None,
    "width": None,
    "height": None,
    "f": 100,
    "n": 50,
    "synth_k": 5,
    "a": 50.0,
    "b": 70.0,
    "alphas": (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    "lambdas": (2.0, 3.0, 5.0),
    "methods": ("nmf", "atnmf"),
    "k": 5,
    "restarts": 10,
    "seed": 0,
    "eps_in": 0.01,
    "eps_out": 0.01,
    "max_inner": 1000,
    "max_outer": 100,
    "out": "results",
}

_INT_KEYS = {"f", "n", "synth_k", "k", "restarts", "max_inner", "max_outer", "bands", "width", "height"}
_FLOAT_KEYS = {"a", "b", "eps_in", "eps_out"}
_FLOAT_LIST_KEYS = {"alphas", "lambdas"}
_STR_LIST_KEYS = {"methods"}
_SEED_KEYS = {"seed"}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None


def _parse_config_value(key, raw):
    raw = raw.strip()
    try:
        if key in _INT_KEYS or key in _SEED_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(p.strip()) for p in raw.split(",") if p.strip())
        if key in _STR_LIST_KEYS:
            return tuple(p.strip() for p in raw.split(",") if p.strip())
    except ValueError:
        raise InvalidConfigError(f"config key {key!r}: cannot parse value {raw!r}") from None
    return raw


def parse_config_file(path):
    """Read a flat key-value config; unknown keys are rejected."""
    values = dict(_CONFIG_DEFAULTS)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_DEFAULTS:
                raise InvalidConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _parse_config_value(key, val)
    return ExperimentConfig(values)


def validate_config(cfg):
    """Collect every violation so a bad grid aborts before any solve."""
    problems = []
    if not cfg.methods:
        problems.append("methods: list is empty")
    for m in cfg.methods:
        if m not in METHODS:
            problems.append(f"methods: unknown method {m!r}")
    if not cfg.alphas:
        problems.append("alphas: list is empty")
    for a in cfg.alphas:
        if not 0.0 < a < 1.0:
            problems.append(f"alphas: {a} outside (0, 1)")
    if "atnmf" in cfg.methods:
        if not cfg.lambdas:
            problems.append("lambdas: list is empty but method 'atnmf' is requested")
        for lam in cfg.lambdas:
            if not lam > 1.0:
                problems.append(f"lambdas: {lam} must be strictly greater than 1")
    if cfg.restarts < 1:
        problems.append(f"restarts: must be >= 1, got {cfg.restarts}")
    if cfg.k < 1:
        problems.append(f"k: must be >= 1, got {cfg.k}")
    if cfg.eps_in <= 0 or cfg.eps_out <= 0:
        problems.append("eps_in/eps_out: must be positive")
    if cfg.max_inner < 1 or cfg.max_outer < 1:
        problems.append("max_inner/max_outer: must be >= 1")
    if cfg.dataset != "synthetic":
        if not os.path.exists(cfg.dataset):
            problems.append(f"dataset: no such file {cfg.dataset!r}")
        if cfg.normalization not in ("none", "cbcl", "unit-scale"):
            problems.append(f"normalization: unknown value {cfg.normalization!r}")
    return problems


def write_config(path, cfg):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# effective experiment config\n")
        for key in _CONFIG_DEFAULTS:
            val = cfg.values[key]
            if val is None:
                continue
            if isinstance(val, tuple):
                fh.write(f"{key} = {','.join(_fmt(x) for x in val)}\n")
            else:
                fh.write(f"{key} = {_fmt(val)}\n")


def _load_experiment_matrix(cfg):
    if cfg.dataset == "synthetic":
        spec = SyntheticSpec(f=cfg.f, n=cfg.n, k=cfg.synth_k, a=cfg.a, b=cfg.b)
        v, _ = generate_synthetic(spec, synth_rng(cfg.seed))
        return v, "synthetic"
    kind = "hyperspectral-cube" if cfg.bands is not None else "dense"
    desc = DatasetDescriptor(
        kind=kind,
        path=cfg.dataset,
        normalization=cfg.normalization,
        bands=cfg.bands,
        width=cfg.width,
        height=cfg.height,
    )
    return load_dataset(desc), os.path.basename(cfg.dataset)


def _grid_cells(cfg):
    """Deterministic grid order: alpha, then method, then lambda."""
    cells = []
    for alpha in cfg.alphas:
        for method in cfg.methods:
            if method == "atnmf":
                for lam in cfg.lambdas:
                    cells.append((alpha, method, lam))
            else:
                cells.append((alpha, method, None))
    return cells


def _worker_count():
    raw = os.environ.get("ATNMF_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidConfigError(f"ATNMF_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _cmd_experiment(args):
    cfg = parse_config_file(args.config)
    for key in ("seed", "restarts", "k", "eps_in", "eps_out", "max_inner", "max_outer", "out"):
        val = getattr(args, key)
        if val is not None:
            cfg.values[key] = val
    if args.alphas is not None:
        cfg.values["alphas"] = tuple(args.alphas)
    if args.lambdas is not None:
        cfg.values["lambdas"] = tuple(args.lambdas)
    if args.methods is not None:
        cfg.values["methods"] = tuple(args.methods)

    problems = validate_config(cfg)
    if problems:
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_USAGE

    v, dataset_name = _load_experiment_matrix(cfg)
    cells = _grid_cells(cfg)

    keep_traces = args.verbose >= 1

    def run_cell(cell):
        alpha, method, lam = cell
        solver_cfg = SolverConfig(
            k=cfg.k,
            lam=lam,
            eps_in=cfg.eps_in,
            eps_out=cfg.eps_out,
            max_inner=cfg.max_inner,
            max_outer=cfg.max_outer,
        )
        return run_experiment(
            v, alpha, method, solver_cfg, cfg.restarts, cfg.seed, keep_traces=keep_traces
        )

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run_cell, cells))
    else:
        summaries = [run_cell(c) for c in cells]

    os.makedirs(cfg.out, exist_ok=True)
    write_config(os.path.join(cfg.out, "config.txt"), cfg)
    if keep_traces:
        trace_dir = os.path.join(cfg.out, "traces")
        os.makedirs(trace_dir, exist_ok=True)
        for s in summaries:
            tag = f"alpha{_fmt(s.alpha)}_{s.method}" + (f"_lam{_fmt(s.lam)}" if s.lam is not None else "")
            for ridx, trace in enumerate(s.traces):
                _write_trace(os.path.join(trace_dir, f"{tag}_r{ridx}.csv"), trace)
    results_path = os.path.join(cfg.out, "results.csv")
    with open(results_path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(
            ["dataset", "alpha", "method", "lambda", "k", "restarts", "rmse_mean", "rmse_std", "seed"]
        )
        for s in summaries:
            out.writerow(
                [
                    dataset_name,
                    _fmt(s.alpha),
                    s.method,
                    _fmt(s.lam),
                    s.k,
                    s.restarts,
                    _fmt(s.rmse_mean),
                    _fmt(s.rmse_std),
                    s.base_seed,
                ]
            )
    # Companion sweep table: one row per (alpha, lambda) with the baseline
    # column repeated, ready for RMSE-against-lambda plots.
    sweep_path = os.path.join(cfg.out, "lambda_sweep.csv")
    baseline = {s.alpha: s.rmse_mean for s in summaries if s.method == "nmf"}
    with open(sweep_path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["dataset", "alpha", "lambda", "atnmf_rmse_mean", "atnmf_rmse_std", "nmf_rmse_mean"])
        for s in summaries:
            if s.method != "atnmf":
                continue
            out.writerow(
                [
                    dataset_name,
                    _fmt(s.alpha),
                    _fmt(s.lam),
                    _fmt(s.rmse_mean),
                    _fmt(s.rmse_std),
                    _fmt(baseline.get(s.alpha)),
                ]
            )
    print(f"wrote {len(summaries)} rows to {results_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="atnmf",
        description="Adversarially trained NMF: synthetic data, single solves, experiment grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic low-rank dataset")
    p.add_argument("--f", type=int, default=100, help="rows (default 100)")
    p.add_argument("--n", type=int, default=50, help="columns (default 50)")
    p.add_argument("--k", type=int, default=5, help="rank (default 5)")
    p.add_argument("--a", type=float, default=50.0, help="inverse-gamma shape (default 50)")
    p.add_argument("--b", type=float, default=70.0, help="inverse-gamma scale (default 70)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path (dense text format)")
    p.add_argument("--ground-truth", action="store_true", help="also write the true factors")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("solve", help="factorize one dataset and write factors plus a trace")
    p.add_argument("data", help="dataset path")
    p.add_argument("--kind", choices=["dense", "image-grid", "hyperspectral-cube"], default="dense")
    p.add_argument("--normalization", choices=["none", "cbcl", "unit-scale"], default="none")
    p.add_argument("--bands", type=int, help="hyperspectral: number of bands")
    p.add_argument("--width", type=int, help="hyperspectral: image width")
    p.add_argument("--height", type=int, help="hyperspectral: image height")
    p.add_argument("--method", choices=list(METHODS), default="atnmf")
    p.add_argument("--lambda", dest="lam", type=float, help="adversary weight (> 1)")
    p.add_argument("--k", type=int, required=True, help="factorization rank")
    p.add_argument("--eps-in", type=float, default=0.01)
    p.add_argument("--eps-out", type=float, default=0.01)
    p.add_argument("--max-inner", type=int, default=1000)
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("experiment", help="run a grid of experiment cells from a config file")
    p.add_argument("config", help="flat key-value config file")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--restarts", type=int, help="override restart count")
    p.add_argument("--k", type=int, help="override factorization rank")
    p.add_argument("--alphas", type=float, nargs="+", help="override hold-out fractions")
    p.add_argument("--lambdas", type=float, nargs="+", help="override adversary weights")
    p.add_argument("--methods", nargs="+", help="override methods")
    p.add_argument("--eps-in", type=float, dest="eps_in")
    p.add_argument("--eps-out", type=float, dest="eps_out")
    p.add_argument("--max-inner", type=int, dest="max_inner")
    p.add_argument("--max-outer", type=int, dest="max_outer")
    p.add_argument("--out", help="override output directory")
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="also write per-restart loss traces")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, InvalidInputError, ParseError, DimensionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE if getattr(e, "filename", None) else EXIT_RUNTIME
    except Exception as e:  # pragma: no cover - unexpected solver failure
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
