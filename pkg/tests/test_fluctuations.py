import math
import random

import numpy as np
import pytest

from qwgrowth import fluctuations as fl
from qwgrowth import moments
from qwgrowth.harness import ensemble_run, pushblock_final_state


def test_variance_of_corner_is_tau():
    for tau in (0.5, 1.0, 2.0):
        assert fl.covariance(1, 1, 1, 1, tau) == pytest.approx(tau, abs=1e-10)


def test_zero_block_contributes_nothing():
    assert fl.covariance_block(2, 0, 1, 1, 1.0) == 0.0


def test_direct_vs_reduced_routes():
    for (n1, r1, n2, r2) in [(2, 1, 1, 1), (2, 2, 2, 1), (3, 2, 2, 2),
                             (3, 1, 3, 1), (2, 2, 2, 2)]:
        d = fl.covariance_block(n1, r1, n2, r2, 1.0, method="direct")
        r = fl.covariance_block(n1, r1, n2, r2, 1.0, method="reduced")
        assert d == pytest.approx(r, abs=1e-10)


def test_block_symmetry_in_arguments():
    a = fl.covariance_block(3, 2, 2, 1, 1.0, method="reduced")
    b = fl.covariance_block(2, 1, 3, 2, 1.0, method="reduced")
    assert a == pytest.approx(b, abs=1e-12)


def test_covariance_matrix_properties():
    table = fl.covariance_matrix(3, 1.0)
    V = table.values
    assert np.allclose(V, V.T)
    assert table.is_psd()
    assert V[0, 0] == pytest.approx(1.0, abs=1e-9)
    # differencing consistency: rebuilding blocks from singles telescopes back
    idx = {c: i for i, c in enumerate(table.coords)}
    block = sum(V[idx[(k1, 2)], idx[(k2, 2)]]
                for k1 in (1, 2) for k2 in (1, 2))
    assert block == pytest.approx(
        fl.covariance_block(2, 2, 2, 2, 1.0, method="reduced"), abs=1e-9)


def test_sde_coefficients_level_one():
    prof = moments.lln_profile(2, tau=1.0)
    sigma, a, b, c = fl.sde_coefficients(prof, 1, 1)
    y = math.exp(-1.0)
    assert sigma == pytest.approx(1.0, abs=1e-12)
    assert a == 0.0
    assert b == pytest.approx(y / (1 - y), rel=1e-12)
    assert c == pytest.approx(y / (1 - y), rel=1e-12)


def test_sde_coefficients_finite_positive():
    prof = moments.lln_profile(4, tau=1.0)
    for n in range(1, 5):
        for k in range(1, n + 1):
            sigma, a, b, c = fl.sde_coefficients(prof, n, k)
            assert 0 < sigma < math.inf
            assert all(map(math.isfinite, (a, b, c)))


def test_sde_coefficients_large_time_limits():
    tau = 200.0
    prof = moments.lln_profile(4, tau=tau)
    for n in range(1, 5):
        for k in range(1, n + 1):
            sigma, a, b, c = fl.sde_coefficients(prof, n, k)
            assert abs(sigma - 1.0) < 0.05
            assert abs(b) < 5.0 / tau ** 2 * 100  # O(tau^-2)
            if k > 1:
                assert abs(tau * a - (k - 1)) / (k - 1) < 0.05
            else:
                assert abs(tau * a) < 0.05
            if k < n:
                assert abs(tau * c - (n - k)) / (n - k) < 0.05


def test_fluctuation_sde_zero_noise_stays_zero():
    class ZeroNoise:
        def standard_normal(self, shape):
            return np.zeros(shape)

    _, snaps = fl.simulate_fluctuation_sde(3, 0.05, 0.4, 1e-3, 4, ZeroNoise(),
                                           init="zero")
    assert np.all(snaps[-1] == 0.0)


def test_fluctuation_sde_matches_formula_covariance():
    rng = np.random.default_rng(2024)
    _, snaps = fl.simulate_fluctuation_sde(3, 0.05, 1.0, 1e-3, 6000, rng)
    X = snaps[-1]
    F = fl.covariance_matrix(3, 1.0).values
    C = np.cov(X.T, ddof=1)
    d = np.diag(C)
    R = X.shape[0]
    for i in range(6):
        for j in range(i + 1):
            se = math.sqrt((d[i] * d[j] + C[i, j] ** 2) / (R - 1))
            assert abs(C[i, j] - F[i, j]) < 4 * se


def test_fluctuation_sde_needs_positive_start():
    with pytest.raises(ValueError):
        fl.simulate_fluctuation_sde(2, 0.0, 1.0, 1e-3, 10,
                                    np.random.default_rng(0))


def test_sample_gaussian_covariance():
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    rng = np.random.default_rng(5)
    X = fl.sample_gaussian(cov, 40000, rng)
    C = np.cov(X.T, ddof=1)
    assert np.abs(C - cov).max() < 0.08
    with pytest.raises(ArithmeticError):
        fl.sample_gaussian(np.array([[1.0, 0.0], [0.0, -0.5]]), 10, rng)


def test_empirical_covariance_mc_agreement():
    # eps-scaled push-block fluctuations vs the contour formula, modest scale
    eps, tau, N = 0.01, 1.0, 2
    replicas = 3000
    stats = ensemble_run(pushblock_final_state, replicas, 2, 99,
                         fn_kwargs={"N": N, "q": math.exp(-eps),
                                    "gamma": tau / eps})
    F = fl.covariance_matrix(N, tau).values
    C = eps * stats.cov
    d = np.diag(C)
    for i in range(3):
        for j in range(i + 1):
            se = math.sqrt((d[i] * d[j] + C[i, j] ** 2) / (replicas - 1))
            assert abs(C[i, j] - F[i, j]) < 4 * se


def test_empirical_covariance_interface():
    prof = moments.lln_profile(2, tau=1.0)
    rng = np.random.default_rng(3)
    flat = rng.poisson(50.0, size=(200, 3)).astype(float)
    est = fl.empirical_fluctuation_covariance(flat, 0.02, prof, 1.0)
    assert est.values.shape == (3, 3)
    assert est.se.shape == (3, 3)
    assert np.allclose(est.values, est.values.T)
    with pytest.raises(ValueError):
        fl.empirical_fluctuation_covariance(flat[:50], 0.02, prof, 1.0)


def test_gaussianity_third_moment():
    # standardized third absolute moment of the corner fluctuation at desk eps
    eps, tau = 0.01, 1.0
    replicas = 4000
    import qwgrowth.harness as hh
    vals = np.array([hh.pushblock_final_state(hh.split_seed(11, i), 1,
                                              math.exp(-eps), tau / eps)[0]
                     for i in range(replicas)])
    xi = (eps * vals - tau) / math.sqrt(eps)
    z = (xi - xi.mean()) / xi.std(ddof=1)
    m3 = np.abs(z) ** 3
    target = 2.0 * math.sqrt(2.0 / math.pi)
    se = m3.std(ddof=1) / math.sqrt(replicas)
    assert abs(m3.mean() - target) < 4 * se
