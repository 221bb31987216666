"""Uniform linear array: steering vectors and band-integrated correlation.

For a single far-field emitter the array response at frequency ``omega``
is ``a_m = exp(-i 2 pi omega d_m sin(theta) / c)`` with ``d_m = m * spacing
* c / (2 omega_c)``.  Integrating ``a a^*`` over the band gives a matrix
whose eigenvalues decay fast; about ``M W / omega_c + 1`` of them matter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayConfig:
    M: int = 101
    omega_c: float = 5e9
    W_band: float = 100e6
    theta: float = np.pi / 4
    spacing: float = 1.0        # in units of half a carrier wavelength
    c: float = SPEED_OF_LIGHT
    n_quad: int = 512
    gain: float = 1.0

    def __post_init__(self):
        if self.M < 1:
            raise InvalidParameterError("M must be >= 1")
        if not 0 <= self.W_band < 2 * self.omega_c:
            raise InvalidParameterError("need 0 <= W_band < 2 omega_c")
        if self.n_quad < 16:
            raise InvalidParameterError("n_quad must be >= 16")

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.M) * self.spacing * self.c / (2.0 * self.omega_c)

    @property
    def predicted_dimension(self) -> float:
        """``M W / omega_c + 1``."""
        return self.M * self.W_band / self.omega_c + 1.0


def steering_vector(cfg: ArrayConfig, omega) -> np.ndarray:
    """Array response at frequency ``omega`` (M-vector, or M x len(omega))."""
    om = np.asarray(omega, dtype=float)
    delay = cfg.positions * np.sin(cfg.theta) / cfg.c
    return cfg.gain * np.exp(-2j * np.pi * np.multiply.outer(delay, om))


def raa_matrix(cfg: ArrayConfig, n_quad: int | None = None) -> np.ndarray:
    """Gauss-Legendre approximation of ``int a a^* d omega`` over the band."""
    n = cfg.n_quad if n_quad is None else n_quad
    half = cfg.W_band / 2.0
    if half == 0:
        a = steering_vector(cfg, cfg.omega_c)
        return np.zeros((cfg.M, cfg.M), dtype=complex) * np.outer(a, a.conj())
    x, w = np.polynomial.legendre.leggauss(n)
    A = steering_vector(cfg, cfg.omega_c + half * x)
    R = (A * (w * half)) @ A.conj().T
    return 0.5 * (R + R.conj().T)


def raa_closed_form(cfg: ArrayConfig) -> np.ndarray:
    """Exact band integral, entrywise ``W exp(-i 2 pi k w_c s) sinc(k W s)``."""
    delay = cfg.positions * np.sin(cfg.theta) / cfg.c
    k = np.subtract.outer(delay, delay)
    return (cfg.gain ** 2 * cfg.W_band * np.exp(-2j * np.pi * k * cfg.omega_c)
            * np.sinc(k * cfg.W_band))


def eigen_decay(R_aa: np.ndarray, threshold: float = 1e-4, herm_tol: float = 1e-10):
    """Eigenvalues sorted descending and scaled so the largest is 1.

    Returns ``(normalized, count)`` where ``count`` is the number of
    normalized eigenvalues at or above ``threshold``.  Tiny negative
    rounding is clipped to zero.
    """
    R_aa = np.asarray(R_aa)
    scale = max(np.abs(R_aa).max(), 1e-300)
    if np.abs(R_aa - R_aa.conj().T).max() > herm_tol * scale:
        raise ValueError("matrix is not Hermitian")
    ev = np.linalg.eigvalsh(0.5 * (R_aa + R_aa.conj().T))[::-1]
    ev = np.clip(ev, 0.0, None)
    if ev[0] == 0:
        return ev, 0
    lam = ev / ev[0]
    return lam, int(np.sum(lam >= threshold))


def write_decay_csv(path, lam) -> None:
    """CSV with columns ``k, lambda_normalized, log10_lambda``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "lambda_normalized", "log10_lambda"])
        for k, v in enumerate(lam, start=1):
            w.writerow([k, repr(float(v)), repr(float(np.log10(v))) if v > 0 else "-inf"])
