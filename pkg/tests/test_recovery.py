import numpy as np
import pytest

from sncsampler.errors import IllConditionedError, InvalidDimensionError, InvalidParameterError
from sncsampler.harness.config import ExperimentConfig
from sncsampler.harness.runner import run_many, simulate
from sncsampler.metrics import relative_error
from sncsampler.operators import GridConfig, build_operator_set
from sncsampler.recovery import (L1SolverParams, column_basis, estimate_rank, full_pipeline,
                                 lasso_fista, row_sparse_recover, solve_s)
from sncsampler.recovery.l1 import group_soft_threshold, soft_threshold


def _sparse_rows(rng, n, W, k):
    Z = np.zeros((n, W), dtype=complex)
    for r in range(n):
        idx = rng.choice(W, k, replace=False)
        Z[r, idx] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return Z


def test_soft_threshold():
    z = np.array([3 + 4j, 0.1, 0])
    out = soft_threshold(z, 1.0)
    np.testing.assert_allclose(out, [(3 + 4j) * 0.8, 0, 0])
    G = group_soft_threshold(np.array([[3.0, 0.1], [4.0, 0.0]]), 1.0)
    np.testing.assert_allclose(G, [[2.4, 0], [3.2, 0]])


def test_solver_params_validation():
    with pytest.raises(InvalidParameterError):
        L1SolverParams(max_iter=0)
    with pytest.raises(InvalidParameterError):
        L1SolverParams(tol_residual=2.0)


def test_lasso_kkt_certificate(small_ops):
    rng = np.random.default_rng(7)
    Q = small_ops.Q2
    Z0 = _sparse_rows(rng, 3, Q.shape[1], 3)
    Y = Z0 @ Q.conj().T + 0.01 * rng.standard_normal((3, Q.shape[0]))
    lam = 0.05 * np.max(np.abs(Y @ Q))
    Z, iters = lasso_fista(Y, Q, lam, max_iter=20000, step_tol=1e-14)
    tol = 1e-6
    G = (Y - Z @ Q.conj().T) @ Q
    active = np.abs(Z) > 1e-10
    assert np.all(np.abs(G[~active]) <= lam * (1 + tol))
    align = G[active] - lam * Z[active] / np.abs(Z[active])
    assert np.abs(align).max() <= lam * tol * 10
    assert active.any()


def test_noiseless_row_recovery_exact():
    rng = np.random.default_rng(0)
    ops = build_operator_set(GridConfig(M=4, W=64, M1=2, M2=2, Omega=4, Delta=32, seed=3))
    Z0 = _sparse_rows(rng, 2, 64, 3)
    rows = row_sparse_recover(Z0 @ ops.Q2.conj().T, ops.Q2)
    assert rows.all_converged
    assert np.abs(rows.Z - Z0).max() < 1e-9


@pytest.mark.parametrize("joint", [False, True])
def test_noisy_row_recovery_residual_in_band(joint):
    rng = np.random.default_rng(1)
    ops = build_operator_set(GridConfig(M=6, W=128, M1=3, M2=3, Omega=8, Delta=64, seed=1))
    Z0 = np.zeros((3, 128), dtype=complex)
    cols = rng.choice(128, 4, replace=False)
    Z0[:, cols] = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    clean = Z0 @ ops.Q2.conj().T
    E = 0.01 * (rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape))
    delta = np.linalg.norm(E)
    rows = row_sparse_recover(clean + E, ops.Q2, delta, L1SolverParams(joint=joint))
    assert rows.all_converged, rows.messages
    res = np.linalg.norm(clean + E - rows.Z @ ops.Q2.conj().T)
    assert res <= delta * (1 + 1e-6)
    assert relative_error(rows.Z, Z0) < 0.1


def _instance(M=20, W=128, R=2, S=6, Omega=8, Delta=32, seed=0, snr=np.inf):
    cfg = ExperimentConfig(M=M, W=W, R=R, S=S, Omega=Omega, Delta=Delta, snr_db=snr)
    return simulate(cfg, seed)


def test_oracle_row_space_bypasses_l1():
    ens, H, ops, meas = _instance(seed=4)
    res = full_pipeline(meas, ops, 2, Yr=ops.A2 @ H.H)
    assert relative_error(res.H_hat, H.H) < 1e-12
    assert "l1_iterations" not in res.diagnostics


def test_full_pipeline_noiseless_exact_and_nyquist():
    ens, H, ops, meas = _instance(seed=2)
    res = full_pipeline(meas, ops, 2)
    assert not res.flagged
    assert relative_error(res.H_hat, H.H) < 1e-9
    X = (H.H / np.diag(ops.T)) @ ops.F.conj().T
    assert relative_error(res.X_hat, X) < 1e-9
    assert res.diagnostics["estimated_rank"] == 2


def test_column_basis_properties():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((10, 3)) @ (rng.standard_normal((3, 12)) + 1j * rng.standard_normal((3, 12)))
    L, info = column_basis(B, 3, return_info=True)
    np.testing.assert_allclose(L.conj().T @ L, np.eye(3), atol=1e-12)
    P = L @ L.conj().T
    np.testing.assert_allclose(P @ B, B, atol=1e-10)
    assert not info["rank_deficient"]
    first = L[np.argmax(np.abs(L) > 1e-8, axis=0), np.arange(3)]
    assert np.all(np.abs(first.imag) < 1e-12) and np.all(first.real > 0)
    _, info = column_basis(B, 5, return_info=True)
    assert info["rank_deficient"]
    with pytest.raises(InvalidDimensionError):
        column_basis(B, 11)
    assert estimate_rank(B) == 3


def test_solve_s_cases():
    rng = np.random.default_rng(0)
    A2 = rng.standard_normal((4, 10))
    L = np.linalg.qr(rng.standard_normal((10, 3)))[0]
    S0 = rng.standard_normal((3, 7))
    np.testing.assert_allclose(solve_s(A2 @ L @ S0, A2, L), S0, atol=1e-12)
    with pytest.raises(InvalidDimensionError):
        solve_s(np.zeros((2, 7)), A2[:2], L)
    # A2 annihilates the basis
    L_bad = np.linalg.svd(A2)[2][4:7].T
    with pytest.raises(IllConditionedError) as exc:
        solve_s(np.zeros((4, 7)), A2, L_bad)
    assert exc.value.sigma_min < 1e-10


def test_noisy_pipeline_error_tracks_noise():
    errs = []
    for snr in (20.0, 40.0):
        ens, H, ops, meas = _instance(seed=8, snr=snr)
        res = full_pipeline(meas, ops, 2)
        errs.append(relative_error(res.H_hat, H.H))
    assert errs[1] < errs[0] / 5
    assert errs[1] < 0.1


@pytest.mark.slow
def test_median_error_nonincreasing_in_delta():
    base = ExperimentConfig(M=20, W=128, R=2, S=8, Omega=4, Delta=8)
    deltas = [8, 16, 32, 64, 128]
    medians = []
    for d in deltas:
        recs = run_many([(base.with_(Delta=d), 5, (k,)) for k in range(50)], workers=1)
        medians.append(np.median([r.rel_err for r in recs]))
    # errors below 1e-10 are solver round-off, treated as equal
    floored = np.maximum(medians, 1e-10)
    assert np.all(np.diff(floored) <= 0), medians


def test_lasso_matches_cvxpy_oracle():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(11)
    ops = build_operator_set(GridConfig(M=4, W=32, M1=2, M2=2, Omega=4, Delta=8, seed=2))
    Q = ops.Q2
    z0 = _sparse_rows(rng, 1, 32, 2)
    y = (z0 @ Q.conj().T)[0] + 0.01 * rng.standard_normal(8)
    lam = 0.05
    z = cp.Variable(32, complex=True)
    obj = 0.5 * cp.sum_squares(y - np.conj(Q) @ z) + lam * cp.norm1(z)
    prob = cp.Problem(cp.Minimize(obj))
    prob.solve()
    Z, _ = lasso_fista(y[None, :], Q, lam, max_iter=50000, step_tol=1e-15)

    def f(v):
        return 0.5 * np.linalg.norm(y - np.conj(Q) @ v) ** 2 + lam * np.abs(v).sum()

    assert f(Z[0]) <= prob.value + 1e-6
    assert np.abs(Z[0] - z.value).max() < 1e-3
