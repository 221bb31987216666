"""Operator identity checks run by ``sncsampler verify operators``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..operators import GridConfig, build_operator_set, spectral_norm, summing_matrix

TOL = 1e-10


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<42s} {self.value:.3e} (bound {self.bound:.3e})"


def operator_identity_suite(cfg: GridConfig, tol: float = TOL) -> list[Check]:
    ops = build_operator_set(cfg)
    W, M = cfg.W, cfg.M
    checks = []

    def add(name, value, bound):
        checks.append(Check(name, float(value), float(bound), bool(value <= bound)))

    tag = f"[W={W},M={M},Omega={cfg.Omega},Delta={cfg.Delta}]"
    add(f"F unitary {tag}", np.linalg.norm(ops.F.conj().T @ ops.F - np.eye(W), 2), tol)
    add(f"A orthogonal {tag}", np.linalg.norm(ops.A.T @ ops.A - np.eye(M), 2), tol)
    t = np.diag(ops.T)
    add(f"T invertible (1/min|T|) {tag}", 1.0 / np.abs(t).min(), np.inf)
    add(f"T^-1 T = I {tag}", np.abs((1.0 / t) * t - 1.0).max(), tol)
    P_od = summing_matrix(cfg.Omega, cfg.Delta)
    add(f"P(O,D) P(D,W) = P(O,W) {tag}", np.abs(P_od @ ops.P2 - ops.P1).max(), 0.0)
    ratio = cfg.Delta / cfg.Omega
    add(f"||P(O,D)|| = sqrt(D/O) {tag}",
        abs(np.linalg.norm(P_od, 2) - np.sqrt(ratio)), tol)
    add(f"P(O,D) P(O,D)^T = (D/O) I {tag}",
        np.abs(P_od @ P_od.T - ratio * np.eye(cfg.Omega)).max(), 0.0)
    add(f"||Q1|| - sqrt(W/Omega) {tag}",
        spectral_norm(ops.Q1) - np.sqrt(W / cfg.Omega), tol)
    add(f"||Q2|| - sqrt(W/Delta) {tag}",
        spectral_norm(ops.Q2) - np.sqrt(W / cfg.Delta), tol)
    DF = ops.D @ ops.F
    add(f"Q1 = P D F exactly {tag}", np.abs(ops.P1 @ DF - ops.Q1).max(), 0.0)
    add(f"Q2 = P D F exactly {tag}", np.abs(ops.P2 @ DF - ops.Q2).max(), 0.0)
    return checks


DEFAULT_CONFIGS = (
    GridConfig(M=4, W=8, M1=2, M2=2, Omega=2, Delta=4, seed=1),
    GridConfig(M=8, W=32, M1=6, M2=2, Omega=4, Delta=8, seed=2),
    GridConfig(M=8, W=64, M1=6, M2=2, Omega=8, Delta=16, seed=3),
    GridConfig(M=100, W=1024, M1=80, M2=20, Omega=64, Delta=256, seed=4),
)
