import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochop import ensembles as ens
from stochop import scalings as sc
from stochop.linalg import SymTridiagonal, eig_tridiag_largest, sv_bidiag_smallest
from stochop.randsrc import StreamKey
from stochop.specfun import DomainError

AIRY1 = 2.3381074104597670385  # -mpmath.airyaizero(1)
J0_1 = 2.4048255576957727686  # mpmath.besseljzero(0, 1)
J1_1 = 3.8317059702075123156  # mpmath.besseljzero(1, 1)


def test_fd_matrices():
    np.testing.assert_array_equal(sc.nabla(2, 3).dense(), [[-1, 1, 0], [0, -1, 1]])
    np.testing.assert_array_equal(sc.delta(3).dense(), [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
    np.testing.assert_array_equal(sc.omega(3).dense(), np.diag([-1, 1, -1]))
    np.testing.assert_array_equal(sc.flip(3).dense(), [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    np.testing.assert_array_equal(sc.interp(2, 3).dense(), [[0.5, 0.5, 0], [0, 0.5, 0.5]])
    for rect in (False, True):
        P = sc.shuffle(4, rect).dense()
        np.testing.assert_array_equal(P @ P.T, np.eye(P.shape[0]))
    # the 2n shuffle sends (v_1..v_n, u_1..u_n) to (v_1, u_1, v_2, u_2, ...)
    P = sc.shuffle(3).dense()
    np.testing.assert_array_equal(P.T @ np.arange(6), [0, 3, 1, 4, 2, 5])


def test_hermite_soft_zero_temperature_is_classical():
    for n in (10, 257):
        s = sc.hermite_soft(ens.hermite_inf(n))
        parts = sc.soft_decompose(s)
        inv = 1.0 / s.h**2
        assert np.abs(s.matrix.diag - 2 * inv).max() <= 1e-12 * inv
        assert np.abs(s.matrix.sup + inv).max() <= 1e-12 * inv
        assert np.abs(parts["E_sub"]).max() <= 1e-12 * inv
        np.testing.assert_allclose(s.grid, s.h * np.arange(1, n))


def test_hermite_soft_converges_to_airy_zero():
    errs = [abs(sc.hermite_soft(ens.hermite_inf(n)).smallest(1)[0] - AIRY1) for n in (100, 1000, 10_000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 0.03


@pytest.mark.parametrize("a", [0.0, 1.0, 2.5])
def test_laguerre_hard_converges_to_bessel_zero(a):
    from stochop.specfun import bessel_zeros

    ref = bessel_zeros(a, 1).zeros[0]
    errs = [abs(sc.laguerre_hard(ens.laguerre_L_inf(n, a)).smallest(1)[0] - ref) for n in (100, 400, 1600)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-3


def test_hard_edge_zero_temperature_m_and_jacobi():
    m = sc.laguerre_hard(ens.laguerre_M_inf(1000, 1.0)).smallest(1)[0]
    j = sc.jacobi_hard(ens.jacobi_inf(1000, 0.0, 0.0)).smallest(1)[0]
    assert m == pytest.approx(J1_1, abs=1e-3)
    assert j == pytest.approx(J0_1, abs=1e-3)


@settings(max_examples=20, deadline=None)
@given(st.integers(5, 60), st.sampled_from([1.0, 2.0, 4.0]), st.integers(0, 2**32))
def test_soft_scaling_equals_direct_formula(n, beta, seed):
    H = ens.sample_hermite(StreamKey(seed), n, beta)
    top = eig_tridiag_largest(H.matrix, 3 if n >= 3 else 1)
    direct = -math.sqrt(2) * n ** (1 / 6) * (top - math.sqrt(2 * n))
    np.testing.assert_allclose(sc.hermite_soft(H).smallest(len(top)), direct, rtol=1e-10, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 60), st.floats(-0.9, 3.0), st.integers(0, 2**32))
def test_hard_scaling_equals_direct_formula(n, a, seed):
    L = ens.sample_laguerre_L(StreamKey(seed), n, 2.0, a)
    direct = math.sqrt(2) * math.sqrt(2 * n + a + 1) * sv_bidiag_smallest(L.matrix, 2)
    np.testing.assert_allclose(sc.laguerre_hard(L).smallest(2), direct, rtol=1e-12)
    J = ens.sample_jacobi(StreamKey(seed), n, 2.0, a, 0.5)
    direct = (2 * n + a + 0.5 + 1) * sv_bidiag_smallest(J.block("B11"), 2)
    np.testing.assert_allclose(sc.jacobi_hard(J).smallest(2), direct, rtol=1e-12)


def test_laguerre_soft_matches_dense_embedding():
    L = ens.sample_laguerre_L(StreamKey(2), 6, 2.0, 0.5)
    T = sc.laguerre_shuffle_embed(L)
    np.testing.assert_allclose(T.to_dense(), sc.shuffle_embed_dense(L), atol=1e-12)
    M = ens.sample_laguerre_M(StreamKey(2), 6, 2.0, 0.5)
    np.testing.assert_allclose(sc.laguerre_shuffle_embed(M).to_dense(), sc.shuffle_embed_dense(M), atol=1e-12)


def test_hermite_similarity_entries():
    H = ens.sample_hermite(StreamKey(3), 8, 2.0)
    D = np.diag(sc.hermite_similarity_D(H))
    np.testing.assert_allclose(D @ H.to_dense() @ np.linalg.inv(D), sc.hermite_similarity(H).to_dense(), atol=1e-12)


def test_noise_matrix_identity():
    beta = 2.0
    H = ens.sample_hermite(StreamKey(4), 500, beta)
    s = sc.hermite_soft(H)
    noise = sc.soft_decompose(s)["noise"]
    W = sc.noise_stats_W(H)
    k = 2 / math.sqrt(beta)
    np.testing.assert_allclose(noise.diag, k * W["W_diag"], atol=1e-9)
    np.testing.assert_allclose(noise.sub, k * W["W_sub"], atol=1e-9)
    np.testing.assert_allclose(noise.sup, 0.0, atol=1e-9)
    with pytest.raises(DomainError):
        sc.noise_stats_W(ens.hermite_inf(5))


def test_chi_tilde_variance():
    n, m = 50, 40_000
    var = np.var([sc.noise_stats_W(ens.sample_hermite(StreamKey(5, i), n, 2.0))["chi_tilde_sq"] for i in range(m)],
                 axis=0)
    exact = sc.noise_stats_W(ens.sample_hermite(StreamKey(5), n, 2.0))["var_exact"]
    np.testing.assert_allclose(var, exact, atol=0.04)


@pytest.mark.parametrize("kind", ["L", "M", "J"])
def test_hard_edge_noise_psi_formula(kind):
    n, beta, a = 300, 2.0, 1.0
    if kind == "L":
        s, s0 = sc.laguerre_hard(ens.sample_laguerre_L(StreamKey(6), n, beta, a)), sc.laguerre_hard(ens.laguerre_L_inf(n, a))
    elif kind == "M":
        s, s0 = sc.laguerre_hard(ens.sample_laguerre_M(StreamKey(6), n, beta, a)), sc.laguerre_hard(ens.laguerre_M_inf(n, a))
    else:
        s, s0 = sc.jacobi_hard(ens.sample_jacobi(StreamKey(6), n, beta, a, 0.5)), sc.jacobi_hard(ens.jacobi_inf(n, a, 0.5))
    dec = sc.log_decompose(s.matrix, s0.matrix)
    noise = sc.hard_edge_noise(dec, s)
    np.testing.assert_allclose(noise.exp_d, noise.exp_d_direct, rtol=1e-10)
    assert noise.g_tilde.shape == dec.g.shape


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.floats(0.5, 5.0), st.floats(-0.9, 3.0), st.integers(0, 2**32))
def test_log_decompose_round_trip(n, beta, a, seed):
    A = sc.laguerre_hard(ens.sample_laguerre_L(StreamKey(seed), n, beta, a)).matrix
    B = sc.laguerre_hard(ens.laguerre_L_inf(n, a)).matrix
    dec = sc.log_decompose(A, B)
    back = dec.apply(B)
    np.testing.assert_allclose(back.main, A.main, rtol=1e-12)
    np.testing.assert_allclose(back.adjacent, A.adjacent, rtol=1e-12)
    assert dec.d[-1] == 0.0


def test_log_decompose_rejects_bad_input():
    A = sc.laguerre_hard(ens.laguerre_L_inf(4, 0.0)).matrix
    with pytest.raises(DomainError):
        sc.log_decompose(A, A.transpose())
    with pytest.raises(DomainError):
        sc.log_decompose(A, A.scaled(-1.0))


@pytest.mark.parametrize("which", ["L", "M", "J"])
def test_hard_fd_approx_error_is_order_h(which):
    errs = []
    for n in (200, 800):
        if which == "L":
            s = sc.laguerre_hard(ens.laguerre_L_inf(n, 1.0))
        elif which == "M":
            s = sc.laguerre_hard(ens.laguerre_M_inf(n, 2.0))
        else:
            s = sc.jacobi_hard(ens.jacobi_inf(n, 1.0, 0.5))
        fd = sc.hard_fd_approx(s)
        # compare away from the origin, where the scheme is consistent
        keep = s.grid[1::2][: s.matrix.nsv] > 0.1
        d = np.abs(s.matrix.main - fd.main)[keep]
        e = np.abs(s.matrix.adjacent - fd.adjacent)[keep[: len(fd.adjacent)]]
        errs.append(max(d.max(), e.max()))
    assert errs[1] < 0.5 * errs[0]


def test_delta_tridiag():
    T = sc.delta_tridiag(4)
    assert isinstance(T, SymTridiagonal)
    np.testing.assert_array_equal(T.to_dense(), sc.delta(4).dense())


def test_laguerre_soft_zero_temperature_example():
    # stated example: n = 5000 within 3e-2 of the first Airy zero
    lam = sc.laguerre_soft(ens.laguerre_L_inf(5000, 0.0)).smallest(1)[0]
    assert lam == pytest.approx(AIRY1, abs=3e-2)
