import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sncsampler.acquisition import acquire, acquire_quadrature, inject_noise
from sncsampler.ensemble import synth_matrix_ensemble, synth_signal_ensemble, to_sl_matrix
from sncsampler.errors import InvalidDimensionError, InvalidParameterError
from sncsampler.operators import GridConfig, build_operator_set
from sncsampler.recovery import column_space_measurements


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def _setup(M, W, Omega, Delta, seed=0, R=2, S=6):
    M2 = max(1, M // 2)
    ops = build_operator_set(GridConfig(M=M, W=W, M1=M - M2, M2=M2, Omega=Omega,
                                        Delta=Delta, seed=seed))
    ens = synth_signal_ensemble(M, W, R, S, seed + 100)
    return ens, ops


def test_acquire_shapes_and_formula(small_ops):
    cfg = small_ops.cfg
    H = synth_matrix_ensemble(cfg.M, cfg.W, 2, 6, 0)
    meas = acquire(to_sl_matrix(H, small_ops.T), small_ops)
    assert meas.Y1.shape == (cfg.M1, cfg.Omega) and meas.Y2.shape == (cfg.M2, cfg.Delta)
    assert meas.noiseless
    Hm = to_sl_matrix(H, small_ops.T).H
    np.testing.assert_allclose(meas.Y2, small_ops.A2 @ Hm @ small_ops.Q2.conj().T)


def test_acquire_rejects_wrong_shape(small_ops):
    with pytest.raises(InvalidDimensionError):
        acquire(np.zeros((3, 3)), small_ops)


@pytest.mark.parametrize("dims", [(4, 32, 4, 8), (8, 128, 16, 32), (6, 33, 1, 11)])
@pytest.mark.parametrize("method", ["closed_form", "gauss"])
def test_quadrature_oracle_matches_matrix_path(dims, method):
    ens, ops = _setup(*dims)
    H = to_sl_matrix(ens, ops.T)
    a, b = acquire(H, ops), acquire_quadrature(ens, ops, n_quad=16, method=method)
    assert _rel(b.Y1, a.Y1) < 1e-12
    assert _rel(b.Y2, a.Y2) < 1e-12


def test_midpoint_error_decays_quadratically():
    ens, ops = _setup(4, 32, 4, 8, seed=3, S=10)
    ref = acquire(to_sl_matrix(ens, ops.T), ops)
    errs = [_rel(acquire_quadrature(ens, ops, n, "midpoint").Y2, ref.Y2) for n in (8, 16, 32)]
    rates = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(3.5 < r < 4.5 for r in rates), (errs, rates)


def test_quadrature_parameter_checks():
    ens, ops = _setup(4, 32, 4, 8)
    with pytest.raises(InvalidParameterError):
        acquire_quadrature(ens, ops, n_quad=2)
    with pytest.raises(ValueError):
        acquire_quadrature(ens, ops, method="simpson")
    other, _ = _setup(4, 64, 4, 8)
    with pytest.raises(InvalidDimensionError):
        acquire_quadrature(other, ops)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                  allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_property_linearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    ops = build_operator_set(GridConfig(M=5, W=32, M1=3, M2=2, Omega=4, Delta=8, seed=seed))
    H1 = rng.standard_normal((5, 32)) + 1j * rng.standard_normal((5, 32))
    H2 = rng.standard_normal((5, 32)) + 1j * rng.standard_normal((5, 32))
    lhs = acquire(alpha * H1 + beta * H2, ops)
    m1, m2 = acquire(H1, ops), acquire(H2, ops)
    scale = 1 + abs(alpha) + abs(beta)
    assert np.abs(lhs.Y1 - (alpha * m1.Y1 + beta * m2.Y1)).max() < 1e-12 * scale * 10
    assert np.abs(lhs.Y2 - (alpha * m1.Y2 + beta * m2.Y2)).max() < 1e-12 * scale * 10


@settings(max_examples=25, deadline=None)
@given(st.floats(-10, 80), st.integers(0, 2**31))
def test_property_reported_delta_is_realized_norm(snr, seed):
    ens, ops = _setup(6, 32, 4, 8, seed=seed % 1000)
    clean = acquire(to_sl_matrix(ens, ops.T), ops)
    noisy = inject_noise(clean, snr, seed)
    assert noisy.delta1 == np.linalg.norm(noisy.E1)
    assert noisy.delta2 == np.linalg.norm(noisy.E2)
    np.testing.assert_array_equal(noisy.Y2, clean.Y2 + noisy.E2)
    total_e = np.hypot(noisy.delta1, noisy.delta2)
    total_s = np.hypot(np.linalg.norm(clean.Y1), np.linalg.norm(clean.Y2))
    assert abs(20 * np.log10(total_s / total_e) - snr) < 1e-9


def test_inject_noise_infinite_and_invalid(small_ops):
    H = np.ones((small_ops.cfg.M, small_ops.cfg.W))
    clean = acquire(H, small_ops)
    same = inject_noise(clean, np.inf, 0)
    assert same.noiseless and same.Y1 is clean.Y1
    with pytest.raises(InvalidParameterError):
        inject_noise(clean, np.nan, 0)
    zero = acquire(np.zeros_like(H), small_ops)
    with pytest.raises(InvalidParameterError):
        inject_noise(zero, 20.0, 0)


def test_column_space_noise_bound():
    ens, ops = _setup(8, 64, 4, 16, seed=5)
    H = to_sl_matrix(ens, ops.T).H
    clean = acquire(H, ops)
    np.testing.assert_allclose(column_space_measurements(clean, ops), H @ ops.Q1.conj().T,
                               atol=1e-12)
    noisy = inject_noise(clean, 10.0, 1)
    Ec = column_space_measurements(noisy, ops) - H @ ops.Q1.conj().T
    cfg = ops.cfg
    bound = noisy.delta1 + np.sqrt(cfg.Delta / cfg.Omega) * noisy.delta2
    assert np.linalg.norm(Ec) <= bound * (1 + 1e-12)
