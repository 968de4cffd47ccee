"""Boosting and forward stagewise regression with certified convergence guarantees."""
from .boosters import (
    AlgorithmConfig,
    BoostState,
    BoostTrace,
    Variant,
    expand_grid,
    geometric_grid,
    lsboost_schedule,
    run,
    run_path,
    select_column,
    step_fse,
    step_fsek,
    step_lsboost,
    step_rfs,
)
from .data import (
    RawDataset,
    StandardizedProblem,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    standardize,
)
from .oracles import (
    certify,
    delta_max,
    solve_lasso,
    solve_least_squares,
)
from .spectral import SpectralSummary, analyze, gamma

__all__ = [
    "AlgorithmConfig", "BoostState", "BoostTrace", "Variant", "expand_grid",
    "geometric_grid", "lsboost_schedule", "run", "run_path", "select_column",
    "step_fse", "step_fsek", "step_lsboost", "step_rfs", "RawDataset",
    "StandardizedProblem", "SyntheticSpec", "generate_synthetic", "load_csv",
    "standardize", "certify", "delta_max", "solve_lasso", "solve_least_squares",
    "SpectralSummary", "analyze", "gamma",
]
