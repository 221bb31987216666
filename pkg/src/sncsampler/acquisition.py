"""Simulated acquisition through the two-branch sampling architecture.

:func:`acquire` applies the discrete model ``Y1 = A1 H Q1^*``,
``Y2 = A2 H Q2^*``.  :func:`acquire_quadrature` integrates the continuous-time
signals chip by chip instead and is used as an oracle for the matrix path.

Time convention: column ``j`` of ``D`` (and of ``F``) is the chip covering
``[(j - 1)/W, j/W)``, with the ``j = 0`` chip wrapped to ``[1 - 1/W, 1)``
since the signals are 1-periodic.  The quadrature samples carry an extra
``1/sqrt(W)`` so they match the unitary DFT normalization of ``F``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .ensemble import EnsembleModel, SLMatrix, complex_normal, eval_time_signal
from .errors import InvalidDimensionError, InvalidParameterError
from .operators import OperatorSet, frequency_grid
from .rng import make_rng


@dataclass(frozen=True)
class MeasurementSet:
    Y1: np.ndarray
    Y2: np.ndarray
    delta1: float = 0.0
    delta2: float = 0.0
    snr_db: Optional[float] = None
    seed: Optional[int] = None
    E1: Optional[np.ndarray] = None
    E2: Optional[np.ndarray] = None

    @property
    def noiseless(self) -> bool:
        return self.delta1 == 0.0 and self.delta2 == 0.0


def _as_array(H):
    return H.H if isinstance(H, SLMatrix) else np.asarray(H)


def acquire(H, ops: OperatorSet) -> MeasurementSet:
    """Noiseless samples of both branches."""
    H = _as_array(H)
    cfg = ops.cfg
    if H.shape != (cfg.M, cfg.W):
        raise InvalidDimensionError(f"H has shape {H.shape}, expected {(cfg.M, cfg.W)}")
    Y1 = ops.A1 @ H @ ops.Q1.conj().T
    Y2 = ops.A2 @ H @ ops.Q2.conj().T
    return MeasurementSet(Y1=Y1, Y2=Y2, seed=cfg.seed)


def _chip_edges(W):
    j = np.arange(W)
    left = (j - 1) / W
    left[0] += 1.0
    return left, left + 1.0 / W


def chip_integrals(ens: EnsembleModel, mix: np.ndarray, method: str = "closed_form",
                   n_quad: int = 64) -> np.ndarray:
    """Integrals of the mixed signals ``mix @ x(t)`` over each chip, M x W."""
    W = ens.W
    left, right = _chip_edges(W)
    if method == "closed_form":
        omega = frequency_grid(W)[ens.support_index].astype(float)
        Ct = mix @ ens.C[:, ens.support_index]
        # antiderivative of exp(-i 2 pi w t) is exp(-i 2 pi w t) / (-i 2 pi w)
        out = np.empty((len(omega), W), dtype=complex)
        for k, w in enumerate(omega):
            if w == 0:
                out[k] = right - left
            else:
                g = -2j * np.pi * w
                out[k] = (np.exp(g * right) - np.exp(g * left)) / g
        return Ct @ out
    if method == "gauss":
        x, wts = np.polynomial.legendre.leggauss(n_quad)
        offsets = (x + 1.0) / (2.0 * W)
        weights = wts / (2.0 * W)
    elif method == "midpoint":
        offsets = (np.arange(n_quad) + 0.5) / (n_quad * W)
        weights = np.full(n_quad, 1.0 / (n_quad * W))
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    t = (left[:, None] + offsets[None, :]) % 1.0
    vals = eval_time_signal(ens, t.ravel()).reshape(ens.M, W, len(offsets))
    return mix @ (vals @ weights)


def acquire_quadrature(ens: EnsembleModel, ops: OperatorSet, n_quad: int = 64,
                       method: str = "closed_form") -> MeasurementSet:
    """Samples obtained by integrating the modulated, mixed signals directly.

    ``method`` is ``"closed_form"`` (exact antiderivative per tone),
    ``"gauss"`` (Gauss-Legendre with ``n_quad`` nodes per chip) or
    ``"midpoint"`` (composite midpoint rule).
    """
    if n_quad < 4:
        raise InvalidParameterError("n_quad must be at least 4")
    cfg = ops.cfg
    if (ens.M, ens.W) != (cfg.M, cfg.W):
        raise InvalidDimensionError("ensemble and operator dimensions differ")
    b = ops.chips

    def branch(mix, rate):
        xt = chip_integrals(ens, mix, method, n_quad) * b
        return xt.reshape(mix.shape[0], rate, cfg.W // rate).sum(axis=2) / np.sqrt(cfg.W)

    return MeasurementSet(Y1=branch(ops.A1, cfg.Omega), Y2=branch(ops.A2, cfg.Delta),
                          seed=cfg.seed)


def inject_noise(meas: MeasurementSet, snr_db: float, rng=None) -> MeasurementSet:
    """Add complex Gaussian noise at the requested SNR.

    Each branch gets noise whose Frobenius norm is ``10**(-snr_db/20)`` times
    that branch's signal norm, so the split follows branch energy and the
    overall ratio equals the same factor.  ``snr_db = inf`` returns the
    input unchanged.
    """
    if np.isposinf(snr_db):
        return replace(meas, delta1=0.0, delta2=0.0, snr_db=None, E1=None, E2=None)
    if not np.isfinite(snr_db):
        raise InvalidParameterError(f"snr_db must be finite or +inf, got {snr_db}")
    n1, n2 = np.linalg.norm(meas.Y1), np.linalg.norm(meas.Y2)
    if n1 == 0 and n2 == 0:
        raise InvalidParameterError("cannot scale noise to a zero signal")
    rng = make_rng(rng)
    ratio = 10.0 ** (-snr_db / 20.0)

    def draw(Y, nrm):
        E = complex_normal(rng, Y.shape)
        en = np.linalg.norm(E)
        return E * (ratio * nrm / en) if en > 0 else E * 0

    E1 = draw(meas.Y1, n1)
    E2 = draw(meas.Y2, n2)
    return replace(meas, Y1=meas.Y1 + E1, Y2=meas.Y2 + E2,
                   delta1=float(np.linalg.norm(E1)), delta2=float(np.linalg.norm(E2)),
                   snr_db=float(snr_db), E1=E1, E2=E2)
