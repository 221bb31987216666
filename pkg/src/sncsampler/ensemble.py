"""Ground-truth sparse-and-correlated ensembles.

Two generators are provided.  :func:`synth_signal_ensemble` builds the
Fourier coefficient matrix ``C = mixing @ latent`` of a real-valued
bandlimited ensemble (optionally conjugate symmetric).  :func:`synth_matrix_ensemble`
draws the filtered matrix ``H`` directly as a tall Gaussian times a
row-sparse fat Gaussian, which is the construction used for the recovery
experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InvalidDimensionError, InvalidParameterError
from .operators import dft_matrix, frequency_grid, lpf_response
from .rng import make_rng


def degrees_of_freedom(M: int, R: int, S: int) -> int:
    """Number of free parameters of a rank-R, S-column-sparse M x W matrix."""
    return M * R + R * S - R * R


def complex_normal(rng, shape) -> np.ndarray:
    """Standard circular complex Gaussian (unit variance)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class EnsembleModel:
    M: int
    W: int
    R: int
    S: int
    C: np.ndarray
    support: np.ndarray        # active frequencies (values in the centered window)
    mixing: np.ndarray         # M x R real
    latent: np.ndarray         # R x W, spectra of the underlying signals
    mode: str = "signal"
    seed: Optional[int] = None

    @property
    def support_index(self) -> np.ndarray:
        """Column positions of the active frequencies."""
        return self.support - frequency_grid(self.W)[0]

    @property
    def dof(self) -> int:
        return degrees_of_freedom(self.M, self.R, self.S)


@dataclass(frozen=True)
class SLMatrix:
    """Sparse-rowed, low-rank matrix ``H = C T``."""

    H: np.ndarray
    R: int
    S: int

    @property
    def support_index(self) -> np.ndarray:
        return np.flatnonzero(np.any(self.H != 0, axis=0))


def _check_dims(M, W, R, S):
    if min(M, W, R, S) < 1:
        raise InvalidParameterError("M, W, R, S must all be positive")
    if R > S:
        raise InvalidParameterError(f"rank R={R} exceeds sparsity S={S}")
    if S > W:
        raise InvalidParameterError(f"sparsity S={S} exceeds grid size W={W}")
    if R > M:
        raise InvalidParameterError(f"rank R={R} exceeds channel count M={M}")


def _symmetric_support(W, S, rng):
    omega = frequency_grid(W)
    positive = omega[(omega > 0) & (-omega >= omega[0])]
    n_pairs = S // 2
    if n_pairs > positive.size:
        raise InvalidParameterError(
            f"S={S} exceeds the {2 * positive.size + 1} symmetric slots of W={W}")
    pos = rng.choice(positive, size=n_pairs, replace=False)
    parts = [pos, -pos]
    if S % 2:
        parts.append(np.array([0]))
    return np.sort(np.concatenate(parts))


def synth_signal_ensemble(M: int, W: int, R: int, S: int, rng=None,
                          conj_symmetric: bool = True) -> EnsembleModel:
    """Random ensemble of ``M`` signals spanned by ``R`` latent signals on ``S`` tones."""
    _check_dims(M, W, R, S)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = make_rng(rng)
    omega = frequency_grid(W)
    lo = omega[0]
    if conj_symmetric:
        support = _symmetric_support(W, S, rng)
    else:
        support = np.sort(rng.choice(omega, size=S, replace=False))

    latent = np.zeros((R, W), dtype=complex)
    if conj_symmetric:
        pos = support[support > 0]
        vals = complex_normal(rng, (R, pos.size))
        latent[:, pos - lo] = vals
        latent[:, -pos - lo] = vals.conj()
        if 0 in support:
            latent[:, -lo] = rng.standard_normal(R)
    else:
        latent[:, support - lo] = complex_normal(rng, (R, S))
    mixing = rng.standard_normal((M, R))
    C = mixing @ latent
    return EnsembleModel(M=M, W=W, R=R, S=S, C=C, support=support, mixing=mixing,
                         latent=latent, mode="signal", seed=seed)


def synth_matrix_ensemble(M: int, W: int, R: int, S: int, rng=None) -> EnsembleModel:
    """Ensemble whose filtered matrix ``H`` is (M x R Gaussian)(R x W row-sparse Gaussian).

    The stored ``C`` is ``H T^{-1}`` so that :func:`to_sl_matrix` gives back
    ``H`` to rounding.  ``latent`` holds the H-domain rows.
    """
    _check_dims(M, W, R, S)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = make_rng(rng)
    omega = frequency_grid(W)
    cols = np.sort(rng.choice(W, size=S, replace=False))
    latent = np.zeros((R, W), dtype=complex)
    latent[:, cols] = complex_normal(rng, (R, S))
    mixing = rng.standard_normal((M, R))
    C = mixing @ (latent / lpf_response(W))
    return EnsembleModel(M=M, W=W, R=R, S=S, C=C, support=omega[cols], mixing=mixing,
                         latent=latent, mode="matrix", seed=seed)


def matrix_mode_h(ens: EnsembleModel) -> np.ndarray:
    """``H`` of a matrix-mode ensemble computed without the filter round trip."""
    if ens.mode != "matrix":
        raise InvalidParameterError("ensemble was not generated in matrix mode")
    return ens.mixing @ ens.latent


def to_sl_matrix(ens: EnsembleModel, T: np.ndarray) -> SLMatrix:
    """``H = C T`` for a diagonal filter ``T`` (matrix or its diagonal)."""
    t = np.diag(T) if np.ndim(T) == 2 else np.asarray(T)
    if t.shape[0] != ens.W:
        raise InvalidDimensionError(f"filter has {t.shape[0]} taps, ensemble has W={ens.W}")
    if ens.mode == "matrix" and np.array_equal(t, lpf_response(ens.W)):
        H = matrix_mode_h(ens)
    else:
        H = ens.C * t
    return SLMatrix(H=H, R=ens.R, S=ens.S)


def eval_time_signal(ens: EnsembleModel, t) -> np.ndarray:
    """Evaluate ``x_m(t) = sum_w C[m, w] exp(-i 2 pi w t)``.

    Scalar ``t`` gives an M-vector; an array of times gives an M x len(t) matrix.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0) or np.any(tt >= 1):
        raise DomainError("t must lie in [0, 1)")
    omega = frequency_grid(ens.W)
    idx = ens.support_index
    phase = np.exp(-2j * np.pi * np.multiply.outer(omega[idx], np.atleast_1d(tt)))
    out = ens.C[:, idx] @ phase
    return out[:, 0] if tt.ndim == 0 else out


def nyquist_samples(ens: EnsembleModel) -> np.ndarray:
    """``X = C F^*``.

    With the unitary DFT, ``X[m, n] = x_m(n / W) / sqrt(W)``.
    """
    return ens.C @ dft_matrix(ens.W).conj().T
