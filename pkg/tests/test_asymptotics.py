import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from qwgrowth import asymptotics as asy


def test_omega_basics():
    assert asy.omega(1.0, 0.5) == pytest.approx(1j)
    for b in np.linspace(0.1, 0.9, 9):
        assert abs(asy.omega(1.0, b)) == pytest.approx(1.0, abs=1e-13)
        assert asy.omega(0.7, b) == pytest.approx(0.7 * asy.omega(1.0, b))
    c, b = asy.omega_inverse(asy.omega(0.8, 0.3))
    assert (c, b) == (pytest.approx(0.8), pytest.approx(0.3))


def test_special_function_wrappers():
    assert asy.elliptic_K(0.0) == pytest.approx(math.pi / 2)
    # K(kappa) ~ ln(4/sqrt(1-kappa^2)) as kappa -> 1
    for kap in (0.999, 0.99999):
        target = math.log(4.0 / math.sqrt(1.0 - kap ** 2))
        assert asy.elliptic_K(kap) == pytest.approx(target, abs=2e-2)
    # Gamma(0,x) + gamma_E + ln x -> 0 as x -> 0
    for x in (1e-4, 1e-6):
        assert abs(asy.incomplete_gamma0(x) + asy.EULER_GAMMA + math.log(x)) < 2 * x
    oracle, _ = quad(lambda t: math.exp(-t) / t, 1.0, 100.0)
    assert asy.incomplete_gamma0(1.0) == pytest.approx(oracle, rel=1e-10)
    assert asy.bessel_J0(0.0) == 1.0 and asy.bessel_I0(0.0) == 1.0


def test_limit_covariance_elliptic_vs_integral():
    for (d, a, c, b) in [(1.0, 0.3, 0.7, 0.6), (1.0, 0.2, 0.8, 0.5),
                         (1.0, 0.5, 0.8, 0.5)]:
        e = asy.limit_covariance_elliptic(d, a, c, b)
        i = asy.limit_covariance_integral(d, a, c, b)
        assert i == pytest.approx(e, abs=1e-6)
        assert e > 0


def test_limit_covariance_symmetric_under_swap():
    om1, om2 = asy.omega(1.0, 0.3), asy.omega(0.7, 0.6)
    assert asy.limit_covariance_omega(om1, om2) == pytest.approx(
        asy.limit_covariance_omega(om2, om1), abs=1e-10)


def test_limit_covariance_real_positive_imag_small():
    # the evaluator asserts a small imaginary part internally
    for (d, a, c, b) in [(1.0, 0.4, 0.6, 0.7), (1.0, 0.6, 0.8, 0.7)]:
        v = asy.limit_covariance_integral(d, a, c, b)
        assert v > 0.0


def test_coincident_points_rejected():
    with pytest.raises(ValueError):
        asy.limit_covariance_elliptic(1.0, 0.3, 1.0, 0.3)
    with pytest.raises(ValueError):
        asy.limit_covariance_omega(asy.omega(1.0, 0.3), asy.omega(1.0, 0.3))


def test_bessel_representation_cross_check():
    pt = (1.0, 0.3, 0.7, 0.6)
    e = asy.limit_covariance_elliptic(*pt)
    b = asy.bessel_rep_covariance(*pt)
    assert e == pytest.approx(b, abs=1e-4)


def test_statement_kappa_fails_bessel_check():
    # the statement's Re-Omega kappa is the documented typo: it disagrees
    pt = (1.0, 0.3, 0.5, 0.4)
    b = asy.bessel_rep_covariance(*pt)
    proof = asy.limit_covariance_elliptic(*pt, variant="proof")
    stmt = asy.limit_covariance_elliptic(*pt, variant="statement")
    assert proof == pytest.approx(b, abs=1e-4)
    assert abs(stmt - b) > 0.1


def test_kappa_tends_to_one_quadratically():
    om1 = asy.omega(1.0, 0.3)
    vals = []
    for gap in (1e-1, 1e-2, 1e-3):
        om2 = om1 * (1 - gap / abs(om1))
        c, b = asy.omega_inverse(om2)
        kap = asy.covariance_kappa(1.0, 0.3, c, b)
        vals.append((1.0 - kap ** 2) / gap ** 2)
    assert vals[2] == pytest.approx(vals[1], rel=0.05)


def test_log_law_remainder_bounded():
    vals = [asy.log_remainder(1.0, 0.3, g) for g in (1e-1, 1e-2, 1e-3)]
    spread = (max(vals) - min(vals)) / abs(np.mean(vals))
    assert spread < 0.25
    assert min(vals) > 0  # the covariance stays above its log prediction here


def test_fast_manifold_block_constant_is_two():
    rng = np.random.default_rng(8)
    for _ in range(20):
        b = rng.uniform(0.05, 0.95)
        W = complex(rng.uniform(-0.9, 0.9), rng.uniform(0.05, 0.9))
        val = asy.fast_manifold_block_constant(b, W)
        assert val == pytest.approx(2.0, abs=1e-10)


def test_derived_limit_matches_finite_N():
    from qwgrowth import largetime as lt
    d, a, c, b = 1.0, 0.3, 0.7, 0.6
    N = 100
    v = N * lt.covariance_single(round((1 - a) * N), N,
                                 round((1 - b) * c * N), round(c * N), 1.0)
    derived = asy.limit_covariance_derived(d, a, c, b)
    assert abs(v - derived) / derived < 0.02


def test_c_function_values():
    assert asy.c_function(0.0) == pytest.approx(math.log(2) - asy.EULER_GAMMA,
                                                abs=1e-12)
    # C(R) ~ 2 ln R at large R
    for R in (20.0, 50.0):
        assert asy.c_function(R) == pytest.approx(2 * math.log(R), abs=1e-3)
    # continuity across the R = 0 limit
    assert asy.c_function(1e-8) == pytest.approx(asy.c_function(0.0), abs=1e-10)


def test_c_function_2d_quadrature():
    R = 1.5
    quad_val = -asy.g_tau_heat_average(1.0, (R, 0.0))
    assert asy.c_function(R) == pytest.approx(quad_val, abs=1e-6)


def test_g_tau_identities():
    # G_1(r) = -C(r)
    for r in (0.5, 1.0, 2.0):
        assert asy.g_tau(1.0, r) == pytest.approx(-asy.c_function(r), abs=1e-12)
    # r -> 0 limit: gamma_E - ln(2 tau)
    tau = 0.5
    assert asy.g_tau(tau, 1e-9) == pytest.approx(
        asy.EULER_GAMMA - math.log(2 * tau), abs=1e-8)
    with pytest.raises(ValueError):
        asy.g_tau(0.5, 0.0)
    with pytest.raises(ValueError):
        asy.g_tau(1.5, 1.0)


def test_g_tau_heat_kernel_average():
    closed = asy.g_tau(0.5, 1.0)
    quad_val = asy.g_tau_heat_average(0.5, (1.0, 0.0))
    assert closed == pytest.approx(quad_val, abs=1e-6)


def test_characteristic_covariance_antisymmetry():
    frame = dict(d=1.0, a=0.3, T=2.0, S=1.0, eta=(0.3, 0.1),
                 lam=(-0.5, 0.4), mu=(0.9, -0.2), nu=(-0.1, -0.7))
    f1 = asy.CharacteristicFrame(**frame)
    swapped = dict(frame, eta=frame["lam"], lam=frame["eta"])
    f2 = asy.CharacteristicFrame(**swapped)
    assert asy.characteristic_covariance(f1) == pytest.approx(
        -asy.characteristic_covariance(f2), abs=1e-12)
    # symmetric under exchanging the time-T pair with the time-S pair
    swapped2 = dict(frame, eta=frame["mu"], mu=frame["eta"],
                    lam=frame["nu"], nu=frame["lam"])
    f3 = asy.CharacteristicFrame(**swapped2)
    assert asy.characteristic_covariance(f1) == pytest.approx(
        asy.characteristic_covariance(f3), abs=1e-12)


def test_characteristic_frame_validation():
    with pytest.raises(ValueError):
        asy.CharacteristicFrame(d=1.0, a=0.3, T=1.0, S=2.0, eta=(0, 0),
                                lam=(1, 0), mu=(0, 1), nu=(1, 1))
    f = asy.CharacteristicFrame(d=1.0, a=0.3, T=2.0, S=1.0, eta=(0, 0),
                                lam=(0, 0), mu=(0, 1), nu=(1, 1))
    with pytest.raises(ValueError):
        asy.characteristic_covariance(f)


def test_ew_matching_identity():
    d, a = 1.0, 0.3
    S = d * math.sqrt(a * (1 - a)) / 4.0
    T = S / (1.0 - 0.45)
    frame = asy.CharacteristicFrame(d=d, a=a, T=T, S=S, eta=(0.3, 0.1),
                                    lam=(-0.5, 0.4), mu=(0.9, -0.2),
                                    nu=(-0.1, -0.7))
    char = asy.characteristic_covariance(frame)
    ew = asy.ew_covariance(frame.tau, 0.0, frame.eta, frame.lam, frame.mu,
                           frame.nu)
    assert char == pytest.approx(ew, abs=1e-10)


def test_ew_equal_time_limit_is_gff():
    x, y, xt, yt = (0.3, 0.1), (-0.5, 0.4), (0.9, -0.2), (-0.1, -0.7)
    gff = asy.gff_covariance(x, y, xt, yt)
    small = asy.ew_covariance(1e-7, 0.0, x, y, xt, yt)
    assert small == pytest.approx(gff, abs=1e-5)
    # swapping x and y flips the sign
    assert asy.ew_covariance(0.5, 0.0, y, x, xt, yt) == pytest.approx(
        -asy.ew_covariance(0.5, 0.0, x, y, xt, yt), abs=1e-13)


def test_propagator_asymptotic_center_ratio():
    le = asy.propagator_exact_log(1.0, 0.5, 2.0, 0.0, 0.0, 2000)
    asym = asy.propagator_gaussian_asymptotic(1.0, 0.5, 2.0, 0.0, 0.0, 2000)
    assert abs(math.exp(le - math.log(asym)) - 1.0) < 0.01


def test_slow_manifold_at_critical_angle():
    for b in (0.2, 0.35, 0.6):
        phi_c = cmath.phase(asy.omega(1.0, b))
        st = asy.slow_manifold(b, phi_c)
        assert st.r == pytest.approx(1.0, abs=1e-9)
        assert abs(st.H) < 1e-10
        assert abs(st.delta) < 1e-5


def test_slow_manifold_interior():
    st = asy.slow_manifold(0.35, 2.0)
    assert 0 < st.r < 1
    assert abs(st.H.real) < 1e-12
    # F + G vanishes at matched critical points (exact identity)
    for X, U in [(st.X_plus, st.U_plus), (st.X_minus, st.U_minus)]:
        assert abs(asy.bulk_F(0.35, st.W, X) + asy.bulk_G(0.35, st.W, U)) < 1e-12
    # H(conj W) = conj H(W)
    h1 = asy.bulk_H(0.35, st.W.conjugate())
    assert h1 == pytest.approx(asy.bulk_H(0.35, st.W).conjugate(), abs=1e-13)


def test_slow_manifold_domain():
    with pytest.raises(ValueError):
        asy.slow_manifold(0.3, 0.0)
    with pytest.raises(ValueError):
        asy.slow_manifold(1.2, 1.0)
