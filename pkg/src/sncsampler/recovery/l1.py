"""Row-wise l1 recovery of the row-space measurements.

Each row ``y`` of ``Y2`` is modelled as ``z Q^H`` for a sparse row ``z``.
The Lagrangian subproblem

    minimize 1/2 ||y - z Q^H||^2 + lam ||z||_1

is solved for all rows at once by FISTA with a per-row ``lam``.  The
noiseless program is approached by continuation down to a small ``lam``
followed by least squares on the detected support; the noisy program is
met by bisecting ``lam`` until each row's residual lands in
``[0.9, 1.0]`` of its share of the noise budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameterError


@dataclass(frozen=True)
class L1SolverParams:
    max_iter: int = 3000
    tol_residual: float = 1e-6
    lambda_min_factor: float = 1e-5
    bisection_steps: int = 40
    debias: bool = True
    n_stages: int = 10
    step_tol: float = 1e-9
    band: tuple = (0.9, 1.0)
    joint: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")
        for name in ("tol_residual", "lambda_min_factor"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InvalidParameterError(f"{name} must lie in (0, 1), got {v}")
        if self.bisection_steps < 0 or self.n_stages < 1:
            raise InvalidParameterError("bisection_steps must be >= 0 and n_stages >= 1")


@dataclass
class RowRecovery:
    """Solution of the l1 stage plus per-row diagnostics."""

    Z: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray
    budgets: np.ndarray
    lambdas: np.ndarray
    converged: np.ndarray
    messages: list = field(default_factory=list)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def soft_threshold(Z, tau):
    """Complex soft thresholding ``z * max(|z| - tau, 0) / |z|``."""
    mag = np.abs(Z)
    scale = np.maximum(mag - tau, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mag > 0, Z * (scale / np.where(mag > 0, mag, 1.0)), 0.0)
    return out


def group_soft_threshold(Z, tau):
    """Column-wise shrinkage for the joint l1,2 penalty."""
    nrm = np.linalg.norm(Z, axis=0, keepdims=True)
    scale = np.maximum(nrm - tau, 0.0) / np.where(nrm > 0, nrm, 1.0)
    return Z * scale


def lasso_fista(Y, Q, lam, Z0=None, max_iter=3000, step_tol=1e-9, lipschitz=None,
                joint=False):
    """FISTA with adaptive restart for ``1/2||Y - Z Q^H||_F^2 + penalty``.

    ``lam`` is a scalar or one value per row (entrywise penalty); with
    ``joint=True`` the penalty is ``lam * sum_j ||Z[:, j]||_2``.
    Returns ``(Z, iterations)`` where ``iterations`` is per row.
    """
    Y = np.atleast_2d(Y)
    n_rows = Y.shape[0]
    L = lipschitz if lipschitz is not None else np.linalg.norm(Q, 2) ** 2
    step = 1.0 / L
    QH = Q.conj().T
    if joint:
        tau = step * float(np.max(lam))
    else:
        tau = step * np.broadcast_to(np.asarray(lam, dtype=float), (n_rows,))[:, None]
    prox = group_soft_threshold if joint else soft_threshold

    Z = np.zeros((n_rows, Q.shape[1]), dtype=complex) if Z0 is None else np.array(Z0, dtype=complex)
    V = Z.copy()
    t = np.ones(n_rows)
    iters = np.zeros(n_rows, dtype=int)
    active = np.ones(n_rows, dtype=bool)
    for _ in range(max_iter):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        Vr = V[rows]
        grad = (Vr @ QH - Y[rows]) @ Q
        Zn = prox(Vr - step * grad, tau if joint else tau[rows])
        diff = Zn - Z[rows]
        tr = t[rows]
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tr * tr))
        # restart momentum where the step opposes the extrapolation direction
        restart = np.real(np.sum(np.conj(Vr - Zn) * diff, axis=1)) > 0
        if joint:
            restart[:] = restart.sum() > 0
        Vn = Zn + ((tr - 1.0) / t_next)[:, None] * diff
        Vn[restart] = Zn[restart]
        t_next[restart] = 1.0
        Z[rows] = Zn
        V[rows] = Vn
        t[rows] = t_next
        iters[rows] += 1
        if joint:
            if np.linalg.norm(diff) <= step_tol * max(np.linalg.norm(Zn), 1e-300):
                break
        else:
            done = np.linalg.norm(diff, axis=1) <= step_tol * np.maximum(
                np.linalg.norm(Zn, axis=1), 1e-300)
            active[rows[done]] = False
    return Z, iters


def _row_residuals(Y, Z, Q):
    return np.linalg.norm(Y - Z @ Q.conj().T, axis=1)


def _debias(Y, Z, Q):
    """Least squares on the support of each row of ``Z``."""
    out = np.zeros_like(Z)
    kmax = max(Q.shape[0] - 1, 1)
    Qc = Q.conj()
    for m in range(Z.shape[0]):
        mag = np.abs(Z[m])
        if not np.any(mag > 0):
            continue
        supp = np.flatnonzero(mag > 0)
        if supp.size > kmax:
            supp = supp[np.argsort(mag[supp])[::-1][:kmax]]
        # y^T = conj(Q[:, S]) z_S^T
        sol, *_ = np.linalg.lstsq(Qc[:, supp], Y[m], rcond=None)
        out[m, supp] = sol
    return out


def row_sparse_recover(Y2, Q2, delta2=0.0, params: L1SolverParams | None = None) -> RowRecovery:
    """Recover ``Z`` with sparse rows from ``Y2 ~ Z Q2^H``.

    ``delta2`` is the Frobenius noise budget of the whole block; each row
    gets ``delta2 / sqrt(n_rows)``.  Rows that cannot be brought within
    tolerance are reported through ``converged`` and ``messages``.
    """
    params = params or L1SolverParams()
    Y = np.atleast_2d(np.asarray(Y2, dtype=complex))
    if delta2 < 0:
        raise ValueError("delta2 must be nonnegative")
    n_rows, _ = Y.shape
    W = Q2.shape[1]
    L = np.linalg.norm(Q2, 2) ** 2
    ynorm = np.linalg.norm(Y, axis=1)
    lam_max = np.max(np.abs(Y @ Q2), axis=1)
    if params.joint:
        lam_max_joint = float(np.max(np.linalg.norm(Y @ Q2, axis=0))) if n_rows else 0.0

    Z = np.zeros((n_rows, W), dtype=complex)
    iters = np.zeros(n_rows, dtype=int)
    lambdas = np.zeros(n_rows)
    messages = []

    if delta2 == 0:
        budgets = np.zeros(n_rows)
        live = ynorm > 0
        if np.any(live):
            Yl = Y[live]
            if params.joint:
                lam_top, lam_end = 0.5 * lam_max_joint, params.lambda_min_factor * lam_max_joint
            else:
                lam_top, lam_end = 0.5 * lam_max[live], params.lambda_min_factor * lam_max[live]
            Zl = None
            it_total = np.zeros(int(live.sum()), dtype=int)
            per_stage = max(params.max_iter // params.n_stages, 1)
            for k in range(params.n_stages):
                frac = k / max(params.n_stages - 1, 1)
                lam = lam_top * (lam_end / lam_top) ** frac
                Zl, it = lasso_fista(Yl, Q2, lam, Z0=Zl, max_iter=per_stage,
                                     step_tol=params.step_tol, lipschitz=L, joint=params.joint)
                it_total += it
            lambdas[live] = lam_end
            if params.debias:
                Zd = _debias(Yl, Zl, Q2)
                better = _row_residuals(Yl, Zd, Q2) <= _row_residuals(Yl, Zl, Q2)
                Zl[better] = Zd[better]
            Z[live] = Zl
            iters[live] = it_total
        residuals = _row_residuals(Y, Z, Q2)
        converged = residuals <= params.tol_residual * np.maximum(ynorm, 1e-300)
        converged |= ynorm == 0
    else:
        budget = delta2 / np.sqrt(n_rows)
        budgets = np.full(n_rows, budget)
        if params.joint:
            Z, iters, lambdas, residuals, converged = _bisect_joint(
                Y, Q2, delta2, lam_max_joint, L, params)
        else:
            Z, iters, lambdas, residuals, converged = _bisect_rows(
                Y, Q2, budget, ynorm, lam_max, L, params)

    for m in np.flatnonzero(~converged):
        messages.append(f"row {m}: residual {residuals[m]:.3e} outside target "
                        f"(budget {budgets[m]:.3e}, |y| {ynorm[m]:.3e})")
    return RowRecovery(Z=Z, iterations=iters, residuals=residuals, budgets=budgets,
                       lambdas=lambdas, converged=converged, messages=messages)


def _bisect_rows(Y, Q, budget, ynorm, lam_max, L, params):
    n_rows, W = Y.shape[0], Q.shape[1]
    lo_f, hi_f = params.band
    Z = np.zeros((n_rows, W), dtype=complex)
    iters = np.zeros(n_rows, dtype=int)
    lambdas = lam_max.copy()
    residuals = ynorm.copy()
    # z = 0 already meets the budget: it is the l1 minimizer
    converged = ynorm <= budget
    todo = np.flatnonzero(~converged)
    if todo.size == 0:
        return Z, iters, lambdas, residuals, converged
    log_hi = np.log(lam_max[todo])
    log_lo = np.log(lam_max[todo] * params.lambda_min_factor)
    best = np.zeros((todo.size, W), dtype=complex)
    best_res = ynorm[todo].copy()
    best_lam = lam_max[todo].copy()
    Zt = np.zeros((todo.size, W), dtype=complex)
    open_ = np.ones(todo.size, dtype=bool)
    for _ in range(max(params.bisection_steps, 1)):
        rows = np.flatnonzero(open_)
        if rows.size == 0:
            break
        lam = np.exp(0.5 * (log_lo[rows] + log_hi[rows]))
        Zr, it = lasso_fista(Y[todo[rows]], Q, lam, Z0=Zt[rows], max_iter=params.max_iter,
                             step_tol=params.step_tol, lipschitz=L)
        Zt[rows] = Zr
        iters[todo[rows]] += it
        res = _row_residuals(Y[todo[rows]], Zr, Q)
        too_big = res > hi_f * budget
        too_small = res < lo_f * budget
        log_hi[rows[too_big]] = np.log(lam[too_big])
        log_lo[rows[too_small]] = np.log(lam[too_small])
        feasible = res <= hi_f * budget
        # keep the feasible iterate with the largest residual seen so far
        upd = feasible & ((best_res[rows] > hi_f * budget) | (res > best_res[rows]))
        best[rows[upd]] = Zr[upd]
        best_res[rows[upd]] = res[upd]
        best_lam[rows[upd]] = lam[upd]
        open_[rows[~too_big & ~too_small]] = False
    Z[todo] = best
    lambdas[todo] = best_lam
    residuals[todo] = best_res
    converged[todo] = (best_res <= hi_f * budget * (1 + 1e-12)) & (best_res >= lo_f * budget)
    return Z, iters, lambdas, residuals, converged


def _bisect_joint(Y, Q, delta2, lam_max, L, params):
    n_rows, W = Y.shape[0], Q.shape[1]
    lo_f, hi_f = params.band
    total = np.linalg.norm(Y)
    Z = np.zeros((n_rows, W), dtype=complex)
    iters = np.zeros(n_rows, dtype=int)
    if total <= delta2:
        res = np.linalg.norm(Y, axis=1)
        return Z, iters, np.full(n_rows, lam_max), res, np.ones(n_rows, dtype=bool)
    log_lo, log_hi = np.log(lam_max * params.lambda_min_factor), np.log(lam_max)
    best, best_res, best_lam = Z.copy(), np.inf, lam_max
    for _ in range(max(params.bisection_steps, 1)):
        lam = float(np.exp(0.5 * (log_lo + log_hi)))
        Z, it = lasso_fista(Y, Q, lam, Z0=Z, max_iter=params.max_iter,
                            step_tol=params.step_tol, lipschitz=L, joint=True)
        iters += it
        res = np.linalg.norm(Y - Z @ Q.conj().T)
        if res <= hi_f * delta2 and (best_res > hi_f * delta2 or res > best_res):
            best, best_res, best_lam = Z.copy(), res, lam
        if res > hi_f * delta2:
            log_hi = np.log(lam)
        elif res < lo_f * delta2:
            log_lo = np.log(lam)
        else:
            break
    ok = lo_f * delta2 <= best_res <= hi_f * delta2
    return (best, iters, np.full(n_rows, best_lam), _row_residuals(Y, best, Q),
            np.full(n_rows, ok))
