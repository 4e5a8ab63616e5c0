import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochop.operators import (
    RayleighRitzConfig,
    airy_basis,
    airy_formal_residual,
    bessel_bases,
    build_airy_K,
    build_bessel_KM,
    classical_airy_eigs,
    classical_bessel_svs,
    phi_from_path,
    phi_path,
    psi_from_path,
    psi_log_variance,
    psi_path,
    stochastic_airy_min_eig,
    stochastic_bessel_min_sv,
)
from stochop.randsrc import StreamKey, brownian_path, zero_path
from stochop.specfun import DomainError, airy_zeros

# mpmath oracles
AIRY = [2.3381074104597670385, 4.0879494441309706166, 5.5205598280955510591]
J0_1 = 2.4048255576957727686
J1_1 = 3.8317059702075123156

PAPER_AIRY = RayleighRitzConfig.airy(2.0)


def test_classical_spectra():
    np.testing.assert_allclose(classical_airy_eigs(3), AIRY, rtol=1e-13)
    assert np.all(np.diff(classical_airy_eigs(20)) > 0)
    assert classical_bessel_svs(0.0, "type_i", 1)[0] == pytest.approx(J0_1, rel=1e-13)
    assert classical_bessel_svs(0.0, "type_ii", 1)[0] == pytest.approx(J1_1, rel=1e-13)
    np.testing.assert_array_equal(classical_bessel_svs(0.4, "type_ii", 5), classical_bessel_svs(1.4, "type_i", 5))
    with pytest.raises(DomainError):
        classical_bessel_svs(-1.0, "type_i", 1)


def test_airy_basis_vanishes_at_origin():
    table = airy_zeros(150)
    for i in (1, 2, 50, 150):
        assert abs(airy_basis(i, [0.0], table)[0]) <= 1e-8
    with pytest.raises(DomainError):
        airy_basis(151, [0.0], table)


def test_airy_basis_orthonormal_on_paper_domain():
    x = PAPER_AIRY.grid
    table = airy_zeros(150)
    V = np.array([airy_basis(i, x, table) for i in range(1, 151)])
    w = np.full(len(x), PAPER_AIRY.mesh)
    w[[0, -1]] *= 0.5
    G = (V * w) @ V.T
    assert np.abs(G - np.eye(150)).max() <= 5e-3


def test_airy_basis_decay_at_domain_end():
    # the stated truncation bound at x = 86.9 for every i <= 150
    table = airy_zeros(150)
    worst = max(abs(airy_basis(i, [86.9], table)[0]) for i in range(1, 151))
    assert worst <= 1e-12


def test_airy_K_noiseless_is_diagonal():
    cfg = RayleighRitzConfig.airy("inf", l=10)
    K = build_airy_K(zero_path(cfg.grid), cfg)
    np.testing.assert_array_equal(K, np.diag(classical_airy_eigs(10)))
    assert stochastic_airy_min_eig(StreamKey(0), cfg) == pytest.approx(AIRY[0], rel=1e-13)
    np.testing.assert_allclose(stochastic_airy_min_eig(None, cfg, k=3), AIRY, rtol=1e-13)


def test_airy_K_rejects_grid_mismatch():
    cfg = RayleighRitzConfig.airy(2.0, l=5)
    with pytest.raises(DomainError):
        build_airy_K(brownian_path(StreamKey(0), np.linspace(0, 86.9, 100)), cfg)


def _airy_K_samples(cfg, count, seed):
    return np.array([build_airy_K(brownian_path(StreamKey(seed, i), cfg.grid), cfg) for i in range(count)])


def test_airy_K_mean():
    cfg = RayleighRitzConfig.airy(2.0, l=5)
    Ks = _airy_K_samples(cfg, 10_000, 21)
    np.testing.assert_allclose(Ks.mean(axis=0), np.diag(classical_airy_eigs(5)), atol=0.02)


def test_airy_K_variance_isometry():
    cfg = RayleighRitzConfig.airy(2.0, l=3)
    Ks = _airy_K_samples(cfg, 10_000, 22)
    x = cfg.grid[:-1]
    table = airy_zeros(3)
    V = np.array([airy_basis(i, x, table) for i in (1, 2, 3)])
    # left-point quadrature of (4/beta) int v_i^2 v_j^2 dx
    exact = 4.0 / cfg.beta * ((V**2 * cfg.mesh) @ (V**2).T)
    np.testing.assert_allclose(Ks.var(axis=0), exact, rtol=0.05)


def test_airy_rayleigh_ritz_monotone_in_basis():
    small = RayleighRitzConfig.airy(2.0, l=75)
    for i in range(5):
        path = brownian_path(StreamKey(23, i), PAPER_AIRY.grid)
        lam_small = np.linalg.eigvalsh(build_airy_K(path, small))[0]
        lam_big = np.linalg.eigvalsh(build_airy_K(path, PAPER_AIRY))[0]
        assert lam_big <= lam_small + 1e-10


def test_phi_and_psi_invariants():
    cfg = RayleighRitzConfig.bessel(2.0)
    psi = psi_path(StreamKey(1), cfg)
    assert psi.psi_values[-1] == 1.0
    assert np.all(psi.psi_values > 0)
    np.testing.assert_allclose(psi.log_psi, np.log(psi.psi_values))
    phi = phi_path(StreamKey(1), RayleighRitzConfig.airy(2.0, l=3, right=10.0))
    assert phi.phi_values[0] == 1.0
    assert np.all(phi.phi_values > 0)
    for beta in ("inf",):
        assert np.all(psi_path(StreamKey(1), RayleighRitzConfig.bessel(beta)).psi_values == 1.0)
        assert np.all(phi_path(StreamKey(1), RayleighRitzConfig.airy(beta, l=3)).phi_values == 1.0)


def test_log_psi_variance():
    beta = 2.0
    cfg = RayleighRitzConfig.bessel(beta)
    j = 500
    assert cfg.grid[j] == pytest.approx(0.5)
    g = cfg.grid
    rng = np.random.default_rng(24)
    paths = 100_000
    # tail Ito sums from 0.5 to 1 for many paths at once
    dB = rng.standard_normal((paths, len(g) - 1 - j)) * math.sqrt(cfg.mesh)
    from stochop.randsrc import BrownianPath

    sample = psi_from_path(BrownianPath(g, np.zeros(len(g)), np.concatenate([np.zeros(j), dB[0]])), beta)
    direct = -(g[j:-1] ** -0.5 @ dB[0]) / math.sqrt(beta)
    assert sample.log_psi[j] == pytest.approx(direct, rel=1e-12, abs=1e-14)
    logs = -(dB @ g[j:-1] ** -0.5) / math.sqrt(beta)
    assert np.var(logs) == pytest.approx(-math.log(0.5) / beta, rel=0.03)
    assert psi_log_variance(cfg)[j] == pytest.approx(-math.log(0.5) / beta, rel=3e-3)


def test_log_phi_variance():
    beta = 4.0
    cfg = RayleighRitzConfig(l=1, mesh=0.01, domain=(0.0, 1.0), beta=beta)
    logs = np.array([np.log(phi_path(StreamKey(25, i), cfg).phi_values[-1]) for i in range(100_000)])
    assert np.var(logs) == pytest.approx(4.0 / beta / 3.0, rel=0.03)


def test_bessel_noiseless_reduction():
    cfg = RayleighRitzConfig.bessel("inf")
    xi, V, U, w = bessel_bases(cfg)
    K, M = build_bessel_KM(psi_path(None, cfg), cfg)
    assert np.abs(M - np.eye(cfg.l)).max() <= 5e-3
    assert np.abs(K - np.diag(xi**2)).max() <= 5e-3 * xi[-1] ** 2
    assert stochastic_bessel_min_sv(None, cfg) == pytest.approx(J0_1, abs=1e-3)


def test_bessel_mass_matrix_lognormal_mean():
    # E[psi^(2 sqrt 2)(x)] = exp(4 Var log psi(x)) for the Gaussian log psi,
    # so E[M] is the quadrature of v_i v_j against that weight
    cfg = RayleighRitzConfig.bessel(4.0, l=4)
    xi, V, U, w = bessel_bases(cfg)
    expect = (V * (w * np.exp(4.0 * psi_log_variance(cfg)))) @ V.T
    Ms = np.array([build_bessel_KM(psi_path(StreamKey(26, i), cfg), cfg)[1] for i in range(10_000)])
    se = Ms.std(axis=0) / math.sqrt(len(Ms))
    assert np.all(np.abs(Ms.mean(axis=0) - expect) <= 5 * se)
    # the pointwise moment at x = 0.5 is light-tailed enough for a tight check
    j = 500
    vals = np.array([psi_path(StreamKey(27, i), cfg).psi_values[j] for i in range(10_000)]) ** (2 * math.sqrt(2))
    assert vals.mean() == pytest.approx(math.exp(4.0 * psi_log_variance(cfg)[j]), abs=5 * vals.std() / 100)


def test_bessel_independent_paths_differ():
    cfg = RayleighRitzConfig.bessel(4.0, l=4)
    K1, M1 = build_bessel_KM(psi_path(StreamKey(1), cfg), cfg)
    K2, M2 = build_bessel_KM(psi_path(StreamKey(2), cfg), cfg)
    assert not np.allclose(K1, K2)
    assert np.allclose(K1, K1.T) and np.allclose(M1, M1.T)
    assert np.all(np.linalg.eigvalsh(M1) > 0)


def test_bessel_rayleigh_ritz_monotone_in_basis():
    big = RayleighRitzConfig.bessel(2.0)
    small = RayleighRitzConfig.bessel(2.0, l=40)
    for i in range(5):
        key = StreamKey(28, i)
        assert stochastic_bessel_min_sv(key, big) <= stochastic_bessel_min_sv(key, small) + 1e-10


def test_psi_first_cell_sensitivity():
    # the singular cell at the origin barely moves sigma_min
    right = RayleighRitzConfig.bessel(2.0, l=40)
    drop = RayleighRitzConfig(l=40, mesh=0.001, beta=2.0, psi_first_cell="drop")
    diffs = [abs(stochastic_bessel_min_sv(StreamKey(29, i), right) - stochastic_bessel_min_sv(StreamKey(29, i), drop))
             for i in range(20)]
    assert np.median(diffs) < 0.05


def test_bessel_rejects_type_ii_and_bad_domain():
    cfg = RayleighRitzConfig(l=3, mesh=0.01, bc="type_ii")
    with pytest.raises(DomainError):
        build_bessel_KM(psi_path(None, cfg), cfg)
    with pytest.raises(DomainError):
        bessel_bases(RayleighRitzConfig(l=3, mesh=0.01, domain=(0.0, 2.0)))


@pytest.mark.parametrize(
    "kwargs",
    [dict(l=0, mesh=0.1), dict(l=2, mesh=0.0), dict(l=2, mesh=0.1, domain=(1.0, 1.0)),
     dict(l=2, mesh=0.1, a=-1.0), dict(l=2, mesh=0.1, bc="type_iii"), dict(l=2, mesh=0.1, beta=0.0),
     dict(l=2, mesh=0.1, psi_first_cell="left")],
)
def test_config_validation(kwargs):
    with pytest.raises((DomainError, ValueError)):
        RayleighRitzConfig(**kwargs)


@given(st.integers(1, 200), st.floats(1e-3, 1.0), st.sampled_from([1.0, 2.0, math.inf]), st.floats(-0.9, 5.0))
@settings(max_examples=40, deadline=None)
def test_config_round_trip(l, mesh, beta, a):
    cfg = RayleighRitzConfig(l=l, mesh=mesh, beta=beta, a=a)
    assert RayleighRitzConfig.from_dict(cfg.to_dict()) == cfg


def test_paper_config_grid():
    assert PAPER_AIRY.cells == 1738
    assert PAPER_AIRY.grid[-1] == pytest.approx(86.9)
    assert RayleighRitzConfig.bessel().cells == 1000


def test_formal_equivalence_of_airy_forms():
    # conjugated form versus white-noise form on a smooth path; the mismatch
    # is pure discretization error and shrinks with the mesh
    res = []
    for m in (400, 800, 1600):
        x = np.linspace(0.0, 6.0, m + 1)
        f = x**2 * np.exp(-x)
        B = 0.7 * np.sin(1.3 * x) + 0.2 * x
        res.append(airy_formal_residual(x, f, B, 2.0))
    assert res[0] > res[1] > res[2]
    assert res[-1] < 1e-3


def test_phi_trapezoid_against_exact_area():
    grid = np.linspace(0.0, 2.0, 2001)
    from stochop.randsrc import BrownianPath

    B = grid**2
    path = BrownianPath(grid, B, np.diff(B))
    phi = phi_from_path(path, 4.0)
    np.testing.assert_allclose(np.log(phi.phi_values), grid**3 / 3, atol=1e-6)
