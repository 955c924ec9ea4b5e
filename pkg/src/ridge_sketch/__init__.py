"""Sketch-preconditioned LSQR for Tikhonov-regularized least squares.

Sketch ``A`` once, then solve ``min ||Ax - b||^2 + lam ||x||^2`` for a whole
grid of ``lam`` values with preconditioned LSQR.
"""
from ._backend import BACKEND
from .core import (
    AugmentedOperator,
    ContractViolation,
    LinearOperator,
    Orientation,
    ProblemInstance,
    RidgeSketchError,
    augmented_apply_over,
    augmented_apply_under,
)
from .generate import GeneratorSpec, generate_problem
from .precond import (
    CholeskyPreconditioner,
    IllConditioned,
    LowRankPreconditioner,
    SvdSketch,
    apply_inverse,
    build_cholesky,
    build_gram,
    estimate_sd,
    exact_sd,
    lowrank_from_svd,
)
from .sketch import EmbeddingSpec, SrttPlan, sketch_left, sketch_right, srtt_apply
from .solver import LsqrConfig, SolveReport, Termination, lsqr
from .sweep import (
    SweepRequest,
    SweepResult,
    lcurve,
    run_sweep,
    solve_over_cholesky,
    solve_over_lowrank,
    solve_qr_baseline,
    solve_under_cholesky,
    solve_under_lowrank,
    solve_unpreconditioned,
)

__version__ = "0.1.0"


__all__ = [
    "apply_inverse",
    "augmented_apply_over",
    "augmented_apply_under",
    "AugmentedOperator",
    "BACKEND",
    "build_cholesky",
    "build_gram",
    "CholeskyPreconditioner",
    "ContractViolation",
    "EmbeddingSpec",
    "estimate_sd",
    "exact_sd",
    "generate_problem",
    "GeneratorSpec",
    "IllConditioned",
    "lcurve",
    "LinearOperator",
    "lowrank_from_svd",
    "LowRankPreconditioner",
    "lsqr",
    "LsqrConfig",
    "Orientation",
    "ProblemInstance",
    "RidgeSketchError",
    "run_sweep",
    "sketch_left",
    "sketch_right",
    "solve_over_cholesky",
    "solve_over_lowrank",
    "solve_qr_baseline",
    "solve_under_cholesky",
    "solve_under_lowrank",
    "solve_unpreconditioned",
    "SolveReport",
    "srtt_apply",
    "SrttPlan",
    "SvdSketch",
    "SweepRequest",
    "SweepResult",
    "Termination",
]
