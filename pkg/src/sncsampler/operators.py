"""Discrete operators of the acquisition chain.

Every matrix here is dense.  ``F`` maps frequency to time: its rows are the
time-chip indices ``0..W-1`` and its columns run over the centered frequency
window returned by :func:`frequency_grid`, in the same order as the diagonal
of ``T`` and the columns of ``C`` and ``H``.  With this layout ``X = C F^*``
and ``Q = P D F`` compose without transposes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensionError
from .rng import make_rng


def frequency_grid(W: int) -> np.ndarray:
    """Centered integer frequencies ``-floor((W-1)/2) .. ceil((W-1)/2)``."""
    if W < 1:
        raise InvalidDimensionError(f"W must be positive, got {W}")
    lo = -((W - 1) // 2)
    return np.arange(lo, lo + W)


def dft_matrix(W: int) -> np.ndarray:
    """Unitary DFT, ``F[n, k] = exp(i 2 pi w_k n / W) / sqrt(W)``.

    ``n`` is the time index and ``w_k`` the k-th centered frequency.
    """
    omega = frequency_grid(W)
    n = np.arange(W)
    return np.exp(2j * np.pi * np.outer(n, omega) / W) / np.sqrt(W)


def lpf_diag(W: int) -> np.ndarray:
    """Integrate-and-dump filter as a W x W diagonal matrix.

    ``T[w, w] = (exp(i 2 pi w / W) - 1) / (i 2 pi w)`` and ``T[0, 0] = 1/W``.
    """
    return np.diag(lpf_response(W))


def lpf_response(W: int) -> np.ndarray:
    """Diagonal of :func:`lpf_diag` as a vector."""
    omega = frequency_grid(W).astype(float)
    out = np.full(W, 1.0 / W, dtype=complex)
    nz = omega != 0
    x = 2j * np.pi * omega[nz]
    out[nz] = np.expm1(x / W) / x
    return out


def summing_matrix(rows: int, cols: int) -> np.ndarray:
    """0/1 matrix that sums ``cols // rows`` adjacent entries into each output."""
    if rows < 1 or cols < 1:
        raise InvalidDimensionError(f"sizes must be positive, got {rows}x{cols}")
    if cols % rows:
        raise InvalidDimensionError(f"{rows} does not divide {cols}")
    return np.kron(np.eye(rows), np.ones((1, cols // rows)))


def haar_orthogonal(M: int, rng=None) -> np.ndarray:
    """Haar-distributed real orthogonal matrix.

    QR of an iid standard normal matrix, with the columns of ``Q`` flipped
    so the triangular factor has a positive diagonal.
    """
    if M < 1:
        raise InvalidDimensionError(f"M must be positive, got {M}")
    rng = make_rng(rng)
    Z = rng.standard_normal((M, M))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def chipping_sequence(W: int, rng=None) -> np.ndarray:
    """Diagonal +/-1 modulation matrix with equiprobable independent signs."""
    if W < 1:
        raise InvalidDimensionError(f"W must be positive, got {W}")
    rng = make_rng(rng)
    b = rng.integers(0, 2, size=W) * 2 - 1
    return np.diag(b.astype(float))


def spectral_norm(A: np.ndarray, iters: int = 500, tol: float = 1e-13, rng=None) -> float:
    """Largest singular value by power iteration on ``A^H A``."""
    rng = make_rng(0 if rng is None else rng)
    x = rng.standard_normal(A.shape[1]) + 0j
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = A.conj().T @ (A @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
        if abs(nrm - est) <= tol * nrm:
            est = nrm
            break
        est = nrm
    return float(np.sqrt(est))


@dataclass(frozen=True)
class GridConfig:
    """Channel counts and sampling rates of the two-branch architecture."""

    M: int
    W: int
    M1: int
    M2: int
    Omega: int
    Delta: int
    seed: int = 0

    def __post_init__(self):
        for name in ("M", "W", "M1", "M2", "Omega", "Delta"):
            if getattr(self, name) < 1:
                raise InvalidDimensionError(f"{name} must be >= 1")
        if self.M1 + self.M2 != self.M:
            raise InvalidDimensionError(
                f"M1 + M2 = {self.M1 + self.M2} differs from M = {self.M}")
        if self.W % self.Omega or self.W % self.Delta or self.Delta % self.Omega:
            raise InvalidDimensionError(
                f"need Omega | Delta | W, got Omega={self.Omega}, "
                f"Delta={self.Delta}, W={self.W}")

    @property
    def csr(self) -> int:
        return self.M1 * self.Omega + self.M2 * self.Delta


@dataclass(frozen=True)
class OperatorSet:
    """All measurement operators for one configuration and seed."""

    cfg: GridConfig
    F: np.ndarray
    T: np.ndarray
    D: np.ndarray
    A: np.ndarray
    P1: np.ndarray = field(repr=False)
    P2: np.ndarray = field(repr=False)
    Q1: np.ndarray = field(repr=False)
    Q2: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("F", "T", "D", "A", "P1", "P2", "Q1", "Q2"):
            getattr(self, name).setflags(write=False)

    @property
    def A1(self) -> np.ndarray:
        return self.A[: self.cfg.M1]

    @property
    def A2(self) -> np.ndarray:
        return self.A[self.cfg.M1:]

    @property
    def chips(self) -> np.ndarray:
        return np.diag(self.D).copy()

    @property
    def P_omega_delta(self) -> np.ndarray:
        return summing_matrix(self.cfg.Omega, self.cfg.Delta)


def build_operator_set(cfg: GridConfig, rng=None) -> OperatorSet:
    """Build F, T, D, A and the composite sensing operators.

    When ``rng`` is omitted the generator is seeded from ``cfg.seed``.  The
    AVMM matrix is drawn before the chipping sequence, from independent
    child streams, so changing ``W`` leaves ``A`` unchanged and vice versa.
    """
    if rng is None:
        rng = cfg.seed
    ss = rng if isinstance(rng, np.random.SeedSequence) else None
    if ss is None and not isinstance(rng, np.random.Generator):
        ss = np.random.SeedSequence(int(rng))
    if ss is not None:
        a_ss, d_ss = ss.spawn(2)
        A = haar_orthogonal(cfg.M, np.random.default_rng(a_ss))
        D = chipping_sequence(cfg.W, np.random.default_rng(d_ss))
    else:
        A = haar_orthogonal(cfg.M, rng)
        D = chipping_sequence(cfg.W, rng)
    F = dft_matrix(cfg.W)
    T = lpf_diag(cfg.W)
    P1 = summing_matrix(cfg.Omega, cfg.W)
    P2 = summing_matrix(cfg.Delta, cfg.W)
    # D is diagonal: scale columns instead of a full product
    DF = np.diag(D)[:, None] * F
    Q1 = P1 @ DF
    Q2 = P2 @ DF
    return OperatorSet(cfg=cfg, F=F, T=T, D=D, A=A, P1=P1, P2=P2, Q1=Q1, Q2=Q2)
