import math

import numpy as np
import pytest

from qwgrowth import largetime as lt
from qwgrowth.qcore import coordinate_order


def test_laguerre_poly_degree_zero_is_one():
    for n in (1, 3, 8):
        assert lt.laguerre_poly(n, 0, 1.3, 0.7 + 0.2j) == pytest.approx(1.0)


def test_laguerre_norm_zero_order():
    # <p^n_0, p^n_0>_n = T^{n-1}/(n-1)! (residue of e^{Tz}/z^n)
    for n in (1, 2, 5):
        for T in (0.5, 2.0):
            assert lt.laguerre_norm(n, 0, T) == pytest.approx(
                T ** (n - 1) / math.factorial(n - 1))
            quad = lt.laguerre_inner(n, 0, 0, T)
            assert quad.real == pytest.approx(lt.laguerre_norm(n, 0, T),
                                              rel=1e-11)


def test_laguerre_orthogonality_spot():
    val = lt.laguerre_inner(4, 1, 2, 1.0)
    scale = math.sqrt(abs(lt.laguerre_norm(4, 1, 1.0)
                          * lt.laguerre_norm(4, 2, 1.0)))
    assert abs(val) / scale < 1e-12
    with pytest.raises(ValueError):
        lt.laguerre_poly(3, 3, 1.0, 0.5)


def test_variance_corner_is_T():
    for T in (0.5, 1.0, 2.0):
        assert lt.covariance_single(1, 1, 1, 1, T) == pytest.approx(T,
                                                                    abs=1e-12)


def test_method_agreement_singles():
    for (n1, r1, n2, r2) in [(3, 2, 2, 1), (4, 1, 4, 1), (6, 3, 5, 3),
                             (5, 2, 3, 3)]:
        k1, k2 = n1 + 1 - r1, n2 + 1 - r2
        s = lt.covariance_single(k1, n1, k2, n2, 1.0, method="series")
        p = lt.covariance_single(k1, n1, k2, n2, 1.0, method="polynomial")
        q = lt.covariance_single(k1, n1, k2, n2, 1.0, method="quadruple")
        assert p == pytest.approx(s, abs=1e-9)
        assert q == pytest.approx(s, abs=1e-9)


def test_method_agreement_blocks():
    for (n1, r1, n2, r2) in [(2, 1, 1, 1), (3, 2, 2, 2), (6, 2, 5, 2)]:
        s = lt.covariance_block(n1, r1, n2, r2, 1.0, method="series")
        m = lt.covariance_block(n1, r1, n2, r2, 1.0, method="multicontour")
        p = lt.covariance_block(n1, r1, n2, r2, 1.0, method="polynomial")
        q = lt.covariance_block(n1, r1, n2, r2, 1.0, method="quadruple")
        assert m == pytest.approx(s, abs=1e-9)
        assert p == pytest.approx(s, abs=1e-9)
        assert q == pytest.approx(s, abs=1e-9)


def test_multicontour_guard():
    with pytest.raises(ValueError):
        lt.covariance_block(4, 3, 3, 2, 1.0, method="multicontour")


def test_diffusive_scaling():
    for (k1, n1, k2, n2) in [(2, 3, 1, 2), (1, 1, 1, 1), (3, 4, 2, 2)]:
        for T in (0.5, 2.5):
            a = lt.covariance_single(k1, n1, k2, n2, T)
            b = T * lt.covariance_single(k1, n1, k2, n2, 1.0)
            assert a == pytest.approx(b, abs=1e-8 * max(1, abs(b)))


def test_covariance_matrix_psd_and_symmetric():
    C = lt.covariance_matrix(4, 1.0)
    assert np.allclose(C, C.T)
    ev = np.linalg.eigvalsh(C)
    assert ev.min() >= -1e-10 * np.trace(C)


def test_propagator_identity_and_rows():
    Y = lt.propagator_matrix(1.0, 1.0, 5)
    assert np.allclose(Y, np.eye(Y.shape[0]))
    Y = lt.propagator_matrix(1.0, 2.5, 6)
    assert np.abs(Y.sum(axis=1) - 1.0).max() < 1e-10
    assert Y.min() >= 0.0
    # the Brownian coordinate is a martingale: ((1,1),(1,1)) entry is 1
    assert Y[0, 0] == pytest.approx(1.0)


def test_propagator_closed_vs_numeric():
    Y = lt.propagator_matrix(1.0, 2.5, 6)
    Yn = lt.propagator_numeric(1.0, 2.5, 6)
    assert np.abs(Y - Yn).max() < 1e-6


def test_propagator_semigroup():
    N = 5
    Y02 = lt.propagator_matrix(1.0, 2.2, N)
    comp = lt.propagator_matrix(1.6, 2.2, N) @ lt.propagator_matrix(1.0, 1.6, N)
    assert np.abs(Y02 - comp).max() < 1e-8


def test_generator_exponential_identity_at_zero():
    for (k, n) in coordinate_order(4):
        for (kp, np_) in coordinate_order(4):
            val = lt.generator_exponential_entry(0.0, k, n, kp, np_)
            assert val == (1.0 if (k, n) == (kp, np_) else 0.0)


def test_generator_exponential_matches_propagator():
    # Y^{T0}(T) = exp(S Ahat) at S = ln(T/T0), with the n - n' exponent
    T0, T = 1.0, 2.5
    S = math.log(T / T0)
    for (k, n) in coordinate_order(4):
        for (kp, np_) in coordinate_order(4):
            a = lt.generator_exponential_entry(S, k, n, kp, np_)
            b = lt.propagator_closed(T0, T, k, n, kp, np_)
            assert a == pytest.approx(b, abs=1e-12)


def test_two_time_covariance_brownian():
    cov0 = lt.covariance_matrix(3, 1.0)
    cross = lt.two_time_covariance(1.0, 3.0, cov0)
    # Cov(zeta(T), zeta(S)) = S for the Brownian coordinate
    assert cross[0, 0] == pytest.approx(1.0, abs=1e-12)
    same = lt.two_time_covariance(1.0, 1.0, cov0)
    assert np.allclose(same, cov0)
    with pytest.raises(ValueError):
        lt.two_time_covariance(1.0, 2.0, np.zeros((4, 5)))


def test_lyapunov_route_matches_formula():
    C = lt.lyapunov_covariance(1.0, 2.0, 4)
    Cx = lt.covariance_matrix(4, 2.0)
    assert np.abs(C - Cx).max() < 1e-6
    assert np.abs(C - C.T).max() < 1e-10
    assert np.linalg.eigvalsh(C).min() >= -1e-10 * np.trace(C)


def test_diffusive_sde_zero_noise():
    class ZeroNoise:
        def standard_normal(self, shape):
            return np.zeros(shape)

    _, snaps = lt.simulate_diffusive_sde(3, 1.0, 2.0, 1e-2, 3, ZeroNoise())
    assert np.all(snaps[-1] == 0.0)


def test_diffusive_sde_variance_growth():
    rng = np.random.default_rng(11)
    cov0 = lt.covariance_matrix(3, 1.0)
    times, snaps = lt.simulate_diffusive_sde(3, 1.0, 2.0, 1e-3, 4000, rng,
                                             init_cov=cov0,
                                             record_times=[1.5, 2.0])
    v15 = snaps[0][:, 0].var(ddof=1)
    v20 = snaps[1][:, 0].var(ddof=1)
    # Brownian coordinate: Var(T) = T
    for v, T in [(v15, 1.5), (v20, 2.0)]:
        se = v * math.sqrt(2.0 / 3999)
        assert abs(v - T) < 4 * se
    assert v20 > v15


def test_diffusive_sde_fixed_time_matches_formula():
    rng = np.random.default_rng(23)
    cov0 = lt.covariance_matrix(4, 1.0)
    _, snaps = lt.simulate_diffusive_sde(4, 1.0, 2.0, 1e-3, 6000, rng,
                                         init_cov=cov0)
    X = snaps[-1]
    target = lt.covariance_matrix(4, 2.0)
    C = np.cov(X.T, ddof=1)
    d = np.diag(C)
    R = X.shape[0]
    for i in range(C.shape[0]):
        for j in range(i + 1):
            se = math.sqrt((d[i] * d[j] + C[i, j] ** 2) / (R - 1))
            assert abs(C[i, j] - target[i, j]) < 4 * se


def test_index_guards():
    with pytest.raises(ValueError):
        lt.covariance_single(0, 1, 1, 1, 1.0)
    with pytest.raises(ValueError):
        lt.propagator_closed(2.0, 1.0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        lt.simulate_diffusive_sde(2, 0.0, 1.0, 1e-3, 2,
                                  np.random.default_rng(0))
