import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sncsampler.errors import DomainError, InvalidDimensionError, InvalidParameterError
from sncsampler.ensemble import (degrees_of_freedom, eval_time_signal, matrix_mode_h,
                                 nyquist_samples, synth_matrix_ensemble,
                                 synth_signal_ensemble, to_sl_matrix)
from sncsampler.operators import dft_matrix, frequency_grid, lpf_diag, lpf_response


def _certify(ens):
    s = np.linalg.svd(ens.C, compute_uv=False)
    if ens.R < min(ens.C.shape):
        assert s[ens.R] < 1e-10 * s[0]
    nz = np.flatnonzero(np.any(ens.C != 0, axis=0))
    assert nz.size == ens.support.size <= ens.S
    np.testing.assert_array_equal(nz, np.sort(ens.support_index))


def test_dof_formula():
    assert degrees_of_freedom(100, 4, 16) == 100 * 4 + 4 * 16 - 16


@pytest.mark.parametrize("S", [4, 5])
def test_signal_ensemble_conjugate_symmetric(S):
    ens = synth_signal_ensemble(6, 32, 2, S, 3)
    _certify(ens)
    w = frequency_grid(32)
    lo = w[0]
    for k in ens.support:
        assert ens.C[:, -k - lo].tolist() == np.conj(ens.C[:, k - lo]).tolist()
    x = nyquist_samples(ens)
    assert np.abs(x.imag).max() < 1e-12


def test_signal_ensemble_odd_W_and_asymmetric():
    ens = synth_signal_ensemble(4, 17, 2, 6, 0, conj_symmetric=False)
    _certify(ens)
    assert ens.support.size == 6


def test_even_W_never_uses_unpaired_frequency():
    W = 16
    top = frequency_grid(W)[-1]
    for seed in range(30):
        ens = synth_signal_ensemble(3, W, 1, 15, seed)
        assert top not in ens.support


def test_matrix_ensemble_h_roundtrip():
    ens = synth_matrix_ensemble(10, 64, 3, 8, 5)
    _certify(ens)
    sl = to_sl_matrix(ens, lpf_diag(64))
    np.testing.assert_array_equal(sl.H, matrix_mode_h(ens))
    np.testing.assert_allclose(ens.C * lpf_response(64), sl.H, atol=1e-13)
    assert np.linalg.matrix_rank(sl.H) == 3
    assert sl.support_index.size == 8


def test_matrix_mode_h_requires_matrix_mode():
    with pytest.raises(InvalidParameterError):
        matrix_mode_h(synth_signal_ensemble(3, 16, 1, 2, 0))


def test_to_sl_matrix_dimension_check():
    ens = synth_matrix_ensemble(3, 16, 1, 2, 0)
    with pytest.raises(InvalidDimensionError):
        to_sl_matrix(ens, np.ones(8))


@pytest.mark.parametrize("bad", [(3, 16, 4, 8), (3, 16, 2, 1), (3, 16, 1, 17), (0, 16, 1, 1)])
def test_invalid_parameters_rejected(bad):
    with pytest.raises(InvalidParameterError):
        synth_matrix_ensemble(*bad, rng=0)


def test_nyquist_samples_match_time_evaluation():
    ens = synth_signal_ensemble(4, 32, 2, 6, 9)
    t = np.arange(32) / 32
    np.testing.assert_allclose(nyquist_samples(ens), eval_time_signal(ens, t) / np.sqrt(32),
                               atol=1e-12)
    np.testing.assert_allclose(nyquist_samples(ens), ens.C @ dft_matrix(32).conj().T)
    assert eval_time_signal(ens, 0.25).shape == (4,)


@pytest.mark.parametrize("t", [-0.1, 1.0, [0.2, 1.5]])
def test_eval_time_signal_domain(t):
    ens = synth_signal_ensemble(2, 16, 1, 2, 0)
    with pytest.raises(DomainError):
        eval_time_signal(ens, t)


def test_seeded_generation_reproducible():
    a = synth_matrix_ensemble(5, 32, 2, 4, 42)
    b = synth_matrix_ensemble(5, 32, 2, 4, 42)
    assert a.C.tobytes() == b.C.tobytes() and a.seed == 42


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.sampled_from([16, 31, 64]), st.integers(1, 4),
       st.integers(4, 12), st.integers(0, 2**31), st.booleans())
def test_property_rank_sparsity_certificates(M, W, R, S, seed, matrix_mode):
    R = min(R, M)
    if matrix_mode:
        ens = synth_matrix_ensemble(M, W, R, S, seed)
    else:
        ens = synth_signal_ensemble(M, W, R, S, seed)
    _certify(ens)
    assert ens.dof == M * R + R * S - R * R
