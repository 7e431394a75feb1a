"""Entropy level-set monodromy and exact entropy classification."""

from .classifier import classify, entropy_log_vector, prime_log_vector
from .levelset import (
    F_full,
    LevelSetSlice,
    SlicePoint,
    constraint_tangent_rank,
    d2_witness,
    gauss_ratio,
    grad_F,
    lambda2_derivatives,
    relent_constraint,
    solve_lambda2,
)
from .monodromy import (
    BranchLedger,
    LogLiftState,
    PathSpec,
    find_branch_points,
    lemma_infinity_check,
    rational_guard,
    run_monodromy,
    track,
    windings,
)
from .spectral import (
    DensityState,
    build_chart,
    eigendecompose,
    entropy_gradient,
    purity,
    relative_entropy,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "BranchLedger",
    "DensityState",
    "F_full",
    "LevelSetSlice",
    "LogLiftState",
    "PathSpec",
    "SlicePoint",
    "build_chart",
    "classify",
    "constraint_tangent_rank",
    "d2_witness",
    "eigendecompose",
    "entropy_gradient",
    "entropy_log_vector",
    "find_branch_points",
    "gauss_ratio",
    "grad_F",
    "lambda2_derivatives",
    "lemma_infinity_check",
    "prime_log_vector",
    "purity",
    "rational_guard",
    "relative_entropy",
    "relent_constraint",
    "run_monodromy",
    "solve_lambda2",
    "track",
    "von_neumann_entropy",
    "windings",
]
