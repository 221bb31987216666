"""Scalar figures of merit: coherence, relative error, efficiency, compression."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensemble import SLMatrix, degrees_of_freedom

SUCCESS_THRESHOLD = 1e-3


def top_right_singular_vectors(H: np.ndarray, R: int) -> np.ndarray:
    """``V_R``: the top-R right singular vectors of ``H`` as a W x R matrix."""
    _, _, Vh = np.linalg.svd(H, full_matrices=False)
    return Vh[:R].conj().T


def coherence_of_basis(V_R: np.ndarray, F: np.ndarray) -> float:
    """``(W / R) * max_n ||(F V_R)[n, :]||^2``."""
    W, R = V_R.shape
    rows = np.sum(np.abs(F @ V_R) ** 2, axis=1)
    return float(W / R * rows.max())


def coherence(H, R: int, F: np.ndarray) -> float:
    """Time-domain coherence of the rank-R row space of ``H``.

    Ranges from 1 (energy spread evenly over time) to W/R (time spikes).
    """
    H = H.H if isinstance(H, SLMatrix) else np.asarray(H)
    return coherence_of_basis(top_right_singular_vectors(H, R), F)


def relative_error(H_hat, H) -> float:
    H = H.H if isinstance(H, SLMatrix) else np.asarray(H)
    nrm = np.linalg.norm(H)
    if nrm == 0:
        raise ValueError("relative error is undefined for a zero ground truth")
    return float(np.linalg.norm(np.asarray(H_hat) - H) / nrm)


def cumulative_sampling_rate(M1: int, Omega: int, M2: int, Delta: int) -> int:
    return M1 * Omega + M2 * Delta


def sampling_efficiency(M, S, R, M1, Omega, M2, Delta) -> Fraction:
    """``R (M + S - R) / (M1 Omega + M2 Delta)`` as an exact fraction."""
    csr = cumulative_sampling_rate(M1, Omega, M2, Delta)
    if csr <= 0:
        raise ValueError("cumulative sampling rate must be positive")
    return Fraction(R * (M + S - R), csr)


def compression_factor(M, W, M1, Omega, M2, Delta) -> Fraction:
    """``(M1 Omega + M2 Delta) / (M W)`` as an exact fraction."""
    if M * W <= 0:
        raise ValueError("M * W must be positive")
    return Fraction(cumulative_sampling_rate(M1, Omega, M2, Delta), M * W)


def extreme_singular_values(B: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(B, compute_uv=False)
    return float(s[-1]), float(s[0])


def singular_diagnostics(Q1, V_R, A2, L_R, slack_q=0.1, slack_a=0.05) -> dict:
    """Extreme singular values of ``Q1 V_R`` and ``A2 L_R`` with band membership.

    Bands: ``[sqrt(1/2) - slack_q, sqrt(3/2) + slack_q]`` for ``Q1 V_R`` and
    ``[0.5 sqrt(M2/M) - slack_a, 2 sqrt(M2/M) + slack_a]`` for ``A2 L_R``.
    """
    qmin, qmax = extreme_singular_values(Q1 @ V_R)
    amin, amax = extreme_singular_values(A2 @ L_R)
    M2, M = A2.shape
    ratio = np.sqrt(M2 / M)
    q_lo, q_hi = np.sqrt(0.5) - slack_q, np.sqrt(1.5) + slack_q
    a_lo, a_hi = 0.5 * ratio - slack_a, 2.0 * ratio + slack_a
    return {
        "q1v_min": qmin, "q1v_max": qmax,
        "q1v_in_band": bool(q_lo <= qmin and qmax <= q_hi),
        "a2l_min": amin, "a2l_max": amax,
        "a2l_in_band": bool(a_lo <= amin and amax <= a_hi),
    }


@dataclass(frozen=True)
class MetricsReport:
    mu0_sq: float
    rel_err: float
    eta: Fraction
    gamma: Fraction
    csr: int
    dof: int
    success: bool
    mu0_source: str = "truth"


def metrics_report(H_hat, H, R, S, cfg, F, threshold=SUCCESS_THRESHOLD,
                   mu0_source="truth") -> MetricsReport:
    """Bundle every reported scalar for one recovery.

    ``mu0_source`` says whether coherence is computed from the ground truth
    (``"truth"``) or from the estimate (``"estimate"``).
    """
    err = relative_error(H_hat, H)
    basis = H if mu0_source == "truth" else H_hat
    return MetricsReport(
        mu0_sq=coherence(basis, R, F),
        rel_err=err,
        eta=sampling_efficiency(cfg.M, S, R, cfg.M1, cfg.Omega, cfg.M2, cfg.Delta),
        gamma=compression_factor(cfg.M, cfg.W, cfg.M1, cfg.Omega, cfg.M2, cfg.Delta),
        csr=cfg.csr,
        dof=degrees_of_freedom(cfg.M, R, S),
        success=bool(err < threshold),
        mu0_source=mu0_source,
    )
