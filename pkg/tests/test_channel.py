"""Channel draws, correlation constructions, and square-root factors."""

import math

import numpy as np
import pytest

from mimodetlab.channel import (
    ChannelRealization,
    CorrelationMatrix,
    GeometryParams,
    correlate,
    draw_iid,
    draw_noise,
    exp_corr_ula,
    geo_corr_ula,
    geo_corr_upa,
    matrix_sqrt,
    upa_corr_kronecker,
)
from mimodetlab.errors import ConfigurationError, NumericError

SEED = 20260815
MOMENT_REL_TOL = 0.01
VEC_COV_TOL = 5e-2


def _assert_toeplitz(R):
    n = R.shape[0]
    for k in range(-(n - 1), n):
        d = np.diagonal(R, k)
        assert np.abs(d - d[0]).max() < 1e-15


def test_exp_corr_rho_zero_is_identity():
    for n in (1, 2, 5):
        R = exp_corr_ula(n, 0.0).matrix
        assert np.array_equal(R, np.eye(n, dtype=np.complex128))


def test_exp_corr_direct_evaluation():
    R = exp_corr_ula(3, 0.5).matrix
    want = np.array([[1.0, 0.5, 0.0625],
                     [0.5, 1.0, 0.5],
                     [0.0625, 0.5, 1.0]])
    assert np.abs(R - want).max() < 1e-15
    _assert_toeplitz(R)
    assert np.abs(R.imag).max() == 0.0


def test_exp_corr_two_by_two_spectrum():
    R = exp_corr_ula(2, 0.9).matrix
    assert R[0, 1] == pytest.approx(0.9)
    w = np.sort(np.linalg.eigvalsh(R))
    assert w == pytest.approx([0.1, 1.9], rel=1e-12)


def test_exp_corr_validation():
    with pytest.raises(ConfigurationError):
        exp_corr_ula(3, 1.0)
    with pytest.raises(ConfigurationError):
        exp_corr_ula(3, -0.2)
    with pytest.raises(ConfigurationError):
        exp_corr_ula(0, 0.5)


def test_upa_kron_matches_blockwise_build():
    # independent construction: entry (i*ny+k, j*ny+l) = Rx[i,j] * Ry[k,l]
    nx, ny, rho = 3, 2, 0.6
    R = upa_corr_kronecker(nx, ny, rho).matrix
    Rx = exp_corr_ula(nx, rho).matrix
    Ry = exp_corr_ula(ny, rho).matrix
    want = np.zeros((nx * ny, nx * ny), dtype=np.complex128)
    for i in range(nx):
        for j in range(nx):
            for k in range(ny):
                for l in range(ny):
                    want[i * ny + k, j * ny + l] = Rx[i, j] * Ry[k, l]
    assert np.abs(R - want).max() == 0.0


def test_upa_kron_corner_cases():
    assert np.array_equal(upa_corr_kronecker(2, 3, 0.0).matrix, np.eye(6))
    R = upa_corr_kronecker(2, 2, 0.5).matrix
    assert R.shape == (4, 4)
    assert R[0, 3] == pytest.approx(0.25)


def test_upa_kron_spectrum_is_product_of_factor_spectra():
    Rx = exp_corr_ula(3, 0.8).matrix
    Ry = exp_corr_ula(2, 0.8).matrix
    R = upa_corr_kronecker(3, 2, 0.8).matrix
    wx = np.linalg.eigvalsh(Rx)
    wy = np.linalg.eigvalsh(Ry)
    want = np.sort(np.outer(wx, wy).ravel())
    got = np.sort(np.linalg.eigvalsh(R))
    assert got == pytest.approx(want, abs=1e-12)


def test_geo_ula_unit_diagonal_and_toeplitz():
    g = GeometryParams(d1=0.5, theta=0.7, xi=0.3)
    R = geo_corr_ula(6, g).matrix
    assert np.abs(np.diagonal(R) - 1.0).max() < 1e-15
    _assert_toeplitz(R)
    assert np.abs(R - R.conj().T).max() < 1e-15


def test_geo_ula_zero_spread_is_pure_phase():
    g = GeometryParams(d1=0.5, theta=0.9, xi=0.0)
    R = geo_corr_ula(5, g).matrix
    assert np.abs(np.abs(R) - 1.0).max() < 1e-12


def test_geo_ula_against_scripted_formula():
    # one-line closed form for the adjacent-element magnitude
    d, theta, xi = 0.5, 3.0 * math.pi / 8.0, math.pi / 8.0
    g = GeometryParams(d1=d, theta=theta, xi=xi)
    R = geo_corr_ula(8, g).matrix
    kd = 2.0 * math.pi * d
    for m in range(1, 8):
        want = (math.exp(-0.5 * (xi * kd) ** 2 * m ** 2
                         * math.cos(theta) ** 2)
                * np.exp(1j * kd * m * math.sin(theta)))
        assert R[m, 0] == pytest.approx(want, abs=1e-14)
    assert abs(R[1, 0]) == pytest.approx(0.8945386951245676, abs=1e-12)


def test_geo_upa_self_correlation_is_one():
    g = GeometryParams(d1=0.5, d2=0.5, theta=0.4, phi=0.9, xi=0.2,
                       sigma=0.3, n_v=3, n_h=3)
    R = geo_corr_upa(g).matrix
    assert np.abs(np.diagonal(R) - 1.0).max() < 1e-12


def test_geo_upa_separable_same_column_reduces_to_elevation():
    g = GeometryParams(d1=0.5, d2=0.5, theta=0.4, phi=0.9, xi=0.2,
                       sigma=0.3, n_v=3, n_h=3)
    R = geo_corr_upa(g, separable=True).matrix
    r_el = geo_corr_upa(
        GeometryParams(d1=0.5, d2=0.5, theta=0.4, phi=0.9, xi=0.2,
                       sigma=0.3, n_v=3, n_h=1),
        separable=True, index_map="nh").matrix
    # same horizontal index b: only the elevation factor survives
    for a in range(3):
        for p in range(3):
            for b in range(3):
                assert R[a * 3 + b, p * 3 + b] == pytest.approx(
                    r_el[a, p], abs=1e-14)


def test_geo_upa_full_vs_separable_deviation_bounded():
    # Both constructions describe the same physical array; the separable
    # form drops the cross term, so they differ but stay close in
    # spectrum for a 4x4 array at moderate angles.
    g = GeometryParams(d1=0.5, d2=0.5, theta=3 * math.pi / 8,
                       phi=math.pi / 3, xi=math.pi / 8, sigma=math.pi / 6,
                       n_v=4, n_h=4)
    full = geo_corr_upa(g).matrix
    sep = geo_corr_upa(g, separable=True).matrix
    assert np.abs(full - sep).max() < 0.35
    wf = np.sort(np.linalg.eigvalsh(full))
    ws = np.sort(np.linalg.eigvalsh(sep))
    assert np.abs(wf - ws).max() < 1.0
    assert wf.min() > 0.0


def test_geo_upa_index_map_rules():
    g = GeometryParams(d1=0.5, d2=0.5, theta=0.4, phi=0.9, xi=0.2,
                       sigma=0.3, n_v=2, n_h=3)
    with pytest.raises(ConfigurationError, match="bijection"):
        geo_corr_upa(g, index_map="nv")
    R = geo_corr_upa(g, index_map="nh").matrix
    assert R.shape == (6, 6)
    with pytest.raises(ConfigurationError, match="index map"):
        geo_corr_upa(g, index_map="rowmajor")


def test_geometry_params_validation():
    with pytest.raises(ConfigurationError):
        GeometryParams(d1=0.0)
    with pytest.raises(ConfigurationError):
        GeometryParams(xi=-0.1)
    with pytest.raises(ConfigurationError):
        GeometryParams(theta=float("nan"))
    with pytest.raises(ConfigurationError):
        GeometryParams(n_v=0)


def test_correlation_matrix_type_checks():
    with pytest.raises(ConfigurationError, match="Hermitian"):
        CorrelationMatrix(matrix=np.array([[1.0, 0.5], [0.2, 1.0]],
                                          dtype=np.complex128))
    with pytest.raises(ConfigurationError, match="diagonal"):
        CorrelationMatrix(matrix=np.array([[2.0, 0.0], [0.0, 2.0]],
                                          dtype=np.complex128))
    with pytest.raises(ConfigurationError, match="square"):
        CorrelationMatrix(matrix=np.zeros((2, 3), dtype=np.complex128))


def test_matrix_sqrt_identity_exact():
    S = matrix_sqrt(np.eye(4, dtype=np.complex128))
    assert np.array_equal(S, np.eye(4, dtype=np.complex128))


def test_matrix_sqrt_reconstructs():
    R = exp_corr_ula(2, 0.5).matrix
    S = matrix_sqrt(R)
    assert np.abs(S @ S.conj().T - R).max() < 1e-12

    rng = np.random.default_rng(SEED)
    A = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    R = A.conj().T @ A
    S = matrix_sqrt(R)
    assert np.linalg.norm(S @ S.conj().T - R) < 1e-9 * np.linalg.norm(R)


def test_matrix_sqrt_rejects_indefinite():
    bad = np.diag([1.0, -0.5]).astype(np.complex128)
    with pytest.raises(NumericError, match="positive semidefinite"):
        matrix_sqrt(bad)


def test_draw_iid_moments():
    rng = np.random.default_rng(SEED)
    H = draw_iid(1000, 1000, rng).H
    assert abs(np.mean(np.abs(H) ** 2) - 1.0) < 0.005
    assert abs(np.mean(H)) < 0.005


def test_draw_iid_determinism_and_validation():
    a = draw_iid(3, 2, np.random.default_rng(42)).H
    b = draw_iid(3, 2, np.random.default_rng(42)).H
    assert np.array_equal(a, b)
    with pytest.raises(ConfigurationError, match="n_r=2 < n_t=3"):
        draw_iid(2, 3, np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        draw_iid(0, 0, np.random.default_rng(0))


def test_draw_noise_moments_and_independence():
    rng = np.random.default_rng(SEED)
    sigma2 = 0.37
    n = draw_noise(1_000_000, sigma2, rng)
    assert abs(np.mean(np.abs(n) ** 2) - sigma2) < MOMENT_REL_TOL * sigma2
    half = len(n) // 2
    cross = np.mean(n[:half] * np.conj(n[half:]))
    assert abs(cross) < 0.01 * sigma2


def test_draw_noise_validation_and_determinism():
    with pytest.raises(ConfigurationError):
        draw_noise(4, 0.0, np.random.default_rng(0))
    a = draw_noise(16, 1.0, np.random.default_rng(7))
    b = draw_noise(16, 1.0, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_correlate_identity_is_exact():
    rng = np.random.default_rng(SEED)
    chan = draw_iid(3, 2, rng)
    out = correlate(chan,
                    CorrelationMatrix(matrix=np.eye(3, dtype=np.complex128)),
                    CorrelationMatrix(matrix=np.eye(2, dtype=np.complex128)))
    assert np.array_equal(out.H, chan.H)
    assert out.model == "correlated"


def test_correlate_dimension_mismatch():
    chan = draw_iid(3, 2, np.random.default_rng(0))
    R2 = exp_corr_ula(2, 0.5)
    with pytest.raises(ConfigurationError, match="do not match"):
        correlate(chan, R2, R2)


def test_correlate_adjacent_transmit_correlation():
    # with R_tx(1,2)=0.9 the empirical E[h11 h12*] must land near 0.9
    R = exp_corr_ula(2, 0.9)
    rng = np.random.default_rng(SEED)
    acc = 0.0
    n_draws = 100_000
    for _ in range(n_draws):
        h = correlate(draw_iid(2, 2, rng), R, R).H
        acc += h[0, 0] * np.conj(h[0, 1])
    est = acc / n_draws
    assert abs(est - 0.9) < 0.02


def test_correlate_vec_covariance_matches_kronecker_model():
    """Sample covariance of vec(H) must approach R_tx^T kron R_rx."""
    rng = np.random.default_rng(SEED)
    g = GeometryParams(d1=0.5, theta=math.pi / 6, xi=0.1)
    R_rx = exp_corr_ula(2, 0.7)
    R_tx = geo_corr_ula(2, g)
    want = np.kron(R_tx.matrix.T, R_rx.matrix)
    n_draws = 200_000
    acc = np.zeros((4, 4), dtype=np.complex128)
    for _ in range(n_draws):
        h = correlate(draw_iid(2, 2, rng), R_rx, R_tx).H
        v = h.reshape(-1, order="F")
        acc += np.outer(v, np.conj(v))
    cov = acc / n_draws
    assert np.abs(cov - want).max() < VEC_COV_TOL
    # per-entry variance stays unit under unit-diagonal correlation
    assert np.abs(np.diagonal(cov) - 1.0).max() < MOMENT_REL_TOL * 3


def test_channel_realization_carries_model_tag():
    chan = ChannelRealization(H=np.zeros((2, 2), dtype=np.complex128))
    assert chan.model == "iid"
