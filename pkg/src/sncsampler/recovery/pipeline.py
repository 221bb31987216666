"""Column basis, least squares, and the assembled two-step pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..acquisition import MeasurementSet
from ..errors import IllConditionedError, InvalidDimensionError
from ..operators import OperatorSet
from .l1 import L1SolverParams, row_sparse_recover

RANK_TOL = 1e-10


@dataclass
class RecoveryResult:
    Yc: np.ndarray
    Yr: np.ndarray
    L_R: np.ndarray
    S_mat: np.ndarray
    H_hat: np.ndarray
    X_hat: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return bool(self.diagnostics.get("flags"))


def column_space_measurements(meas: MeasurementSet, ops: OperatorSet) -> np.ndarray:
    """``Yc = A^* [Y1; Y2 P_{Omega,Delta}^*]``, equal to ``H Q1^*`` without noise."""
    cfg = ops.cfg
    if cfg.Delta % cfg.Omega:
        raise InvalidDimensionError(f"Omega={cfg.Omega} does not divide Delta={cfg.Delta}")
    if meas.Y1.shape != (cfg.M1, cfg.Omega) or meas.Y2.shape != (cfg.M2, cfg.Delta):
        raise InvalidDimensionError("measurement shapes do not match the operator set")
    # P_{Omega,Delta}^* sums Delta/Omega adjacent columns
    Y2c = meas.Y2.reshape(cfg.M2, cfg.Omega, cfg.Delta // cfg.Omega).sum(axis=2)
    return ops.A.conj().T @ np.vstack([meas.Y1, Y2c])


def _fix_phase(U):
    """Rotate each column so its first significant entry is real positive."""
    U = U.copy()
    for k in range(U.shape[1]):
        col = U[:, k]
        mag = np.abs(col)
        if mag.max() == 0:
            continue
        i = int(np.argmax(mag > 1e-8 * mag.max()))
        U[:, k] = col * (np.conj(col[i]) / mag[i])
    return U


def column_basis(Yc: np.ndarray, R: int, return_info: bool = False):
    """Top-R left singular vectors of ``Yc`` with a fixed phase convention.

    If ``R`` exceeds the numerical rank the basis is completed with
    singular vectors of the null space and ``info["rank_deficient"]`` is set.
    """
    M, n_cols = Yc.shape
    if not 1 <= R <= M:
        raise InvalidDimensionError(f"R={R} must lie in [1, {M}]")
    U, s, _ = np.linalg.svd(Yc, full_matrices=R > min(M, n_cols))
    L = _fix_phase(U[:, :R])
    sig = np.zeros(R)
    sig[: min(R, s.size)] = s[:R]
    top = s[0] if s.size else 0.0
    info = {
        "singular_values": s,
        "rank_deficient": bool(top == 0 or sig[-1] <= RANK_TOL * top),
    }
    return (L, info) if return_info else L


def estimate_rank(Yc: np.ndarray, max_rank: Optional[int] = None) -> int:
    """Rank guess from the largest ratio of consecutive singular values."""
    s = np.linalg.svd(Yc, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    if s.size == 1:
        return 1
    floor = np.finfo(float).eps * s[0]
    k = s.size - 1 if max_rank is None else min(max_rank, s.size - 1)
    ratios = s[:k] / np.maximum(s[1:k + 1], floor)
    return int(np.argmax(ratios)) + 1


def solve_s(Yr: np.ndarray, A2: np.ndarray, L_R: np.ndarray) -> np.ndarray:
    """Least-squares coefficients ``S = (A2 L_R)^+ Yr``."""
    B = A2 @ L_R
    if B.shape[0] < B.shape[1]:
        raise InvalidDimensionError(f"M2={B.shape[0]} is smaller than R={B.shape[1]}")
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[-1] < RANK_TOL:
        raise IllConditionedError(
            f"sigma_min(A2 L_R) = {sv[-1]:.3e} is below {RANK_TOL:g}", sigma_min=float(sv[-1]))
    S, *_ = np.linalg.lstsq(B, Yr, rcond=None)
    return S


def reconstruct_nyquist(H_hat: np.ndarray, T: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``X_hat = H_hat T^{-1} F^*``."""
    t = np.diag(T) if np.ndim(T) == 2 else np.asarray(T)
    return (H_hat / t) @ F.conj().T


def full_pipeline(meas: MeasurementSet, ops: OperatorSet, R: int,
                  params: Optional[L1SolverParams] = None,
                  Yr: Optional[np.ndarray] = None) -> RecoveryResult:
    """Run both recovery steps and map back to Nyquist samples.

    Passing ``Yr`` skips the l1 stage (used to isolate the least-squares step).
    """
    params = params or L1SolverParams()
    flags = []
    diag = {}
    Yc = column_space_measurements(meas, ops)
    if Yr is None:
        rows = row_sparse_recover(meas.Y2, ops.Q2, meas.delta2, params)
        Yr = rows.Z
        diag.update(l1_iterations=rows.iterations.tolist(), l1_residuals=rows.residuals.tolist(),
                    l1_lambdas=rows.lambdas.tolist(), l1_converged=rows.all_converged)
        if not rows.all_converged:
            flags.append("l1_not_converged")
            diag["l1_messages"] = rows.messages
    L_R, info = column_basis(Yc, R, return_info=True)
    if info["rank_deficient"]:
        flags.append("rank_deficient_Yc")
    B_sv = np.linalg.svd(ops.A2 @ L_R, compute_uv=False)
    S_mat = solve_s(Yr, ops.A2, L_R)
    H_hat = L_R @ S_mat
    X_hat = reconstruct_nyquist(H_hat, ops.T, ops.F)
    diag.update(yc_singular_values=info["singular_values"].tolist(),
                estimated_rank=estimate_rank(Yc),
                sigma_A2L=(float(B_sv[-1]), float(B_sv[0])),
                flags=flags)
    return RecoveryResult(Yc=Yc, Yr=Yr, L_R=L_R, S_mat=S_mat, H_hat=H_hat, X_hat=X_hat,
                          diagnostics=diag)
