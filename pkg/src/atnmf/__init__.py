"""Adversarially trained nonnegative matrix factorization for matrix
completion: a worst-case bounded perturbation of the data is refreshed in
closed form between rounds of masked multiplicative factor updates."""

from .backend import backend_name
from .datasets import (
    DatasetDescriptor,
    load_dataset,
    load_dense,
    load_hyperspectral,
    normalize_cbcl,
    write_dense,
)
from .errors import DimensionError, InvalidConfigError, InvalidInputError, ParseError
from .evaluate import HoldoutSplit, RunSummary, holdout_split, rmse, run_experiment
from .sampling import (
    holdout_rng,
    restart_rng,
    rng_stream,
    sample_half_normal,
    sample_half_normal_matrix,
    sample_inverse_gamma,
    synth_rng,
)
from .solver import (
    SolveResult,
    SolverConfig,
    TraceRecord,
    at_nmf,
    init_factors,
    mm_update_h,
    mm_update_w,
    objective,
    relative_change,
    scalar_r_oracle,
    standard_nmf,
    update_r,
)
from .synth import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "DatasetDescriptor",
    "DimensionError",
    "HoldoutSplit",
    "InvalidConfigError",
    "InvalidInputError",
    "ParseError",
    "RunSummary",
    "SolveResult",
    "SolverConfig",
    "SyntheticSpec",
    "TraceRecord",
    "at_nmf",
    "backend_name",
    "generate_synthetic",
    "holdout_rng",
    "holdout_split",
    "init_factors",
    "load_dataset",
    "load_dense",
    "load_hyperspectral",
    "mm_update_h",
    "mm_update_w",
    "normalize_cbcl",
    "objective",
    "relative_change",
    "restart_rng",
    "rmse",
    "rng_stream",
    "run_experiment",
    "sample_half_normal",
    "sample_half_normal_matrix",
    "sample_inverse_gamma",
    "scalar_r_oracle",
    "standard_nmf",
    "synth_rng",
    "update_r",
    "write_dense",
]
