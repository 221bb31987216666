"""Two-step reconstruction: l1 row-space recovery, then column basis and least squares."""

from .l1 import L1SolverParams, RowRecovery, lasso_fista, row_sparse_recover
from .pipeline import (
    RecoveryResult,
    column_basis,
    column_space_measurements,
    estimate_rank,
    full_pipeline,
    reconstruct_nyquist,
    solve_s,
)

__all__ = [
    "L1SolverParams", "RowRecovery", "lasso_fista", "row_sparse_recover",
    "RecoveryResult", "column_basis", "column_space_measurements", "estimate_rank",
    "full_pipeline", "reconstruct_nyquist", "solve_s",
]
