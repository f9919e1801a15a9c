"""Closed-form large-N objects: the double-critical-point location, the
limiting covariance (chord double integral and elliptic closed form), the
short-distance logarithmic law, propagator Gaussian asymptotics, covariance
along characteristic rays, the matching Edwards-Wilkinson/Gaussian-free-field
covariance, and slow-manifold diagnostics.
"""

import cmath
import math
from dataclasses import dataclass
from math import lgamma

import numpy as np
from scipy import special as sp

from .largetime import propagator_log_entry

EULER_GAMMA = 0.5772156649015328606


# ---------------------------------------------------------------------------
# special functions (scipy-backed, spec-shaped surface)
# ---------------------------------------------------------------------------

def elliptic_K(kappa):
    """Complete elliptic integral of the first kind in the modulus kappa."""
    if not 0.0 <= kappa < 1.0:
        raise ValueError("elliptic_K needs kappa in [0, 1)")
    # ellipkm1 takes the complementary parameter 1 - m, accurate near kappa=1
    return float(sp.ellipkm1(max(1.0 - kappa * kappa, 0.0)))


def incomplete_gamma0(x):
    """Gamma(0, x) = int_x^inf e^{-t}/t dt for x > 0."""
    if not x > 0:
        raise ValueError("incomplete_gamma0 needs x > 0")
    return float(sp.exp1(x))


def bessel_J0(x):
    return float(sp.j0(x))


def bessel_I0(x):
    return float(sp.i0(x))


# ---------------------------------------------------------------------------
# Omega and the limiting covariance
# ---------------------------------------------------------------------------

def omega(c, b):
    """Double-critical-point location c (1 - 2b + 2i sqrt(b(1-b)))."""
    if not (c > 0 and 0 < b < 1):
        raise ValueError("need c > 0 and b in (0,1)")
    return c * (1.0 - 2.0 * b + 2.0j * math.sqrt(b * (1.0 - b)))


def omega_inverse(w):
    """Recover (c, b) from a point in the open upper half plane: c = |w|."""
    c = abs(w)
    if not (c > 0 and w.imag > 0):
        raise ValueError("point must lie in the upper half plane")
    b = 0.5 * (1.0 - w.real / c)
    if not 0 < b < 1:
        raise ValueError("point is not of the Omega(c, b) form")
    return c, b


def _arc_geometry(om_z, om_w):
    """Bow offset for the Z-path when the chords share their real part."""
    R1, I1 = om_z.real, om_z.imag
    R2, I2 = om_w.real, om_w.imag
    if abs(om_z - om_w) < 1e-12:
        raise ValueError("coincident Omega points are rejected")
    tol = 1e-12 * max(1.0, abs(om_z), abs(om_w))
    if R1 > R2 + tol:
        return 0.0
    if abs(R1 - R2) <= tol:
        return 0.1 * min(I1, I2)
    raise ValueError("Z-chord left of W-chord")


def _arc_nodes(om, delta, sign, nodes):
    """Sine-arc path R + sign*delta*cos^2(th) + i I sin(th) with the combined
    measure d(path)/sqrt((path-om)(path-conj om)) returned per node.

    On the straight chord (delta = 0) the measure is exactly i dtheta.
    """
    R, I = om.real, om.imag
    th, w = np.polynomial.legendre.leggauss(nodes)
    th = th * (math.pi / 2)
    w = w * (math.pi / 2)
    s = math.sin
    sin_t = np.sin(th)
    cos_t = np.cos(th)
    path = R + sign * delta * cos_t ** 2 + 1j * I * sin_t
    bracket = I * I + (delta * cos_t) ** 2 + 2j * sign * delta * I * sin_t
    ratio = (1j * I - 2.0 * sign * delta * sin_t) / np.sqrt(bracket)
    return path, ratio * w


def limit_covariance_omega(om_z, om_w, nodes=201):
    """16/(2pi i)^2 double chord integral of 1/((Z-W) sqrt sqrt) with the
    Z-path through om_z kept right of the W-path through om_w.

    When the Z-chord would sit strictly left of the W-chord, the required
    rightward deformation pinches against the W endpoints; the two-point
    covariance is symmetric (the elliptic closed form makes that manifest),
    so that case is evaluated with the roles exchanged. Coincident real
    parts follow the bow-the-Z-arc rule.
    """
    if om_z.imag <= 0 or om_w.imag <= 0:
        raise ValueError("Omega points must be in the open upper half plane")
    tol = 1e-12 * max(1.0, abs(om_z), abs(om_w))
    if om_z.real < om_w.real - tol:
        return limit_covariance_omega(om_w, om_z, nodes=nodes)
    dz = _arc_geometry(om_z, om_w)
    if dz > 0.0:
        nodes = max(nodes, 401)  # the bowed arc passes near the W-chord
    Z, mz = _arc_nodes(om_z, dz, +1.0, nodes)
    W, mw = _arc_nodes(om_w, 0.0, -1.0, nodes)
    diff = Z[:, None] - W[None, :]
    if np.abs(diff).min() < 1e-8 * max(abs(om_z), abs(om_w)):
        raise ValueError("chord paths pinch; geometry infeasible")
    val = -(4.0 / math.pi ** 2) * np.sum(mz[:, None] * mw[None, :] / diff)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val)):
        raise ArithmeticError("limit covariance came out complex: %s" % val)
    return float(val.real)


def limit_covariance_integral(d, a, c, b, nodes=201):
    """Large-N covariance limit via the chord double integral."""
    if not (0 < a < 1 and 0 < b < 1 and 0 < c <= d):
        raise ValueError("need a, b in (0,1) and 0 < c <= d")
    om_z, om_w = omega(d, a), omega(c, b)
    return limit_covariance_omega(om_z, om_w, nodes=nodes)


def covariance_kappa(d, a, c, b, variant="proof"):
    """Elliptic modulus; the proof carries Im Omega in the numerator, the
    statement prints Re Omega (documented discrepancy; "statement" variant
    kept to exhibit it)."""
    om1, om2 = omega(d, a), omega(c, b)
    R1, I1 = om1.real, om1.imag
    R2, I2 = om2.real, om2.imag
    den = math.hypot(R1 - R2, I1 + I2)
    if variant == "proof":
        num = 2.0 * math.sqrt(I1 * I2)
    elif variant == "statement":
        if R1 * R2 < 0:
            raise ValueError("statement variant undefined for opposite-sign Re")
        num = 2.0 * math.sqrt(R1 * R2)
    else:
        raise ValueError("variant must be 'proof' or 'statement'")
    return num / den


def limit_covariance_elliptic(d, a, c, b, variant="proof"):
    """4 kappa K(kappa) / (pi sqrt(Im Omega_1 Im Omega_2))."""
    om1, om2 = omega(d, a), omega(c, b)
    if abs(om1 - om2) < 1e-14:
        raise ValueError("coincident Omega points are rejected")
    kap = covariance_kappa(d, a, c, b, variant=variant)
    if kap >= 1.0:
        raise ValueError("kappa >= 1 occurs only at coincident points")
    return 4.0 * kap * elliptic_K(kap) / (math.pi * math.sqrt(om1.imag * om2.imag))


def bessel_rep_covariance(d, a, c, b, cutoff=None):
    """4 int_0^inf e^{-lambda(R1-R2)} J0(I1 l) J0(I2 l) dl; needs R1 > R2."""
    om1, om2 = omega(d, a), omega(c, b)
    R1, I1 = om1.real, om1.imag
    R2, I2 = om2.real, om2.imag
    if R1 <= R2:
        raise ValueError("Bessel representation needs Re Omega_1 > Re Omega_2")
    from scipy.integrate import quad
    decay = R1 - R2
    upper = cutoff or max(200.0, 60.0 / decay)
    val, _ = quad(lambda l: math.exp(-l * decay) * sp.j0(I1 * l) * sp.j0(I2 * l),
                  0.0, upper, limit=800)
    return 4.0 * val


def log_correlation_prediction(d, a, c, b):
    """Leading short-distance term (-4/pi) ln|Omega_1 - Omega_2| / sqrt(I1 I2)."""
    om1, om2 = omega(d, a), omega(c, b)
    gap = abs(om1 - om2)
    if gap == 0:
        raise ValueError("need a nonzero Omega gap")
    return (-4.0 / math.pi) * math.log(gap) / math.sqrt(om1.imag * om2.imag)


def log_remainder(d, a, gap, evaluator="elliptic"):
    """Covariance minus its log-law prediction at |Omega gap| = gap, with the
    second point pulled radially toward the origin (same angle, c < d)."""
    om1 = omega(d, a)
    om2 = om1 * (1.0 - gap / abs(om1))
    c, b = omega_inverse(om2)
    if evaluator == "elliptic":
        cov = limit_covariance_elliptic(d, a, c, b)
    else:
        cov = limit_covariance_omega(om1, om2)
    return cov - log_correlation_prediction(d, a, c, b)


# ---------------------------------------------------------------------------
# heat-kernel-smoothed log kernel and EW/GFF covariances
# ---------------------------------------------------------------------------

def c_function(R):
    """C(R) = Gamma(0, R^2/2) + ln R^2; C(0) = ln 2 - Euler gamma by limit."""
    if R < 0:
        raise ValueError("need R >= 0")
    if R == 0.0:
        return math.log(2.0) - EULER_GAMMA
    return float(sp.exp1(R * R / 2.0)) + math.log(R * R)


def g_tau(tau, r):
    """G_tau(r) = -Gamma(0, r^2/(2 tau)) - ln r^2 on tau in (0, 1], r > 0."""
    if not 0.0 < tau <= 1.0:
        raise ValueError("g_tau domain is tau in (0, 1]")
    if not r > 0.0:
        raise ValueError("r = 0 rejected (log-divergent pieces)")
    return -float(sp.exp1(r * r / (2.0 * tau))) - math.log(r * r)


def g_tau_heat_average(tau, xi, quad_points=400):
    """Validation route: -int p_tau(sigma) ln|sigma - xi|^2 dsigma by polar
    Gauss-Legendre quadrature around the offset point."""
    from numpy.polynomial.legendre import leggauss
    r0 = math.hypot(*xi)
    # integrate in polar coordinates centered at xi: sigma = xi + rho e^{i phi}
    tmax = math.sqrt(2.0 * tau) * 9.0 + r0
    xs, ws = leggauss(quad_points)
    rho = 0.5 * tmax * (xs + 1.0)
    wr = 0.5 * tmax * ws
    phis, wphi = leggauss(160)
    phis = (phis + 1.0) * math.pi
    wphi = wphi * math.pi
    total = 0.0
    for p, wp in zip(phis, wphi):
        sx = xi[0] + rho * math.cos(p)
        sy = xi[1] + rho * math.sin(p)
        dens = np.exp(-(sx ** 2 + sy ** 2) / (2.0 * tau)) / (2.0 * math.pi * tau)
        total += wp * np.sum(wr * rho * dens * np.log(rho ** 2))
    return -total


@dataclass(frozen=True)
class CharacteristicFrame:
    """Space-time frame around one characteristic ray.

    d > 0 and a in (0,1) fix the ray, T > S > 0 the two times
    (tau = (T-S)/T in (0,1)), and eta/lam/mu/nu the four sqrt(N)-scale
    offsets (2-vectors; eta and lam at time T, mu and nu at time S).
    """

    d: float
    a: float
    T: float
    S: float
    eta: tuple
    lam: tuple
    mu: tuple
    nu: tuple

    def __post_init__(self):
        if not (self.d > 0 and 0 < self.a < 1):
            raise ValueError("need d > 0 and a in (0,1)")
        if not self.T > self.S > 0:
            raise ValueError("need T > S > 0")

    @property
    def tau(self):
        return (self.T - self.S) / self.T


def _dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


def characteristic_covariance(frame):
    """Limit covariance of offset differences along the characteristic:
    S/(pi d sqrt(a(1-a))) times the four-term G_tau bracket."""
    pts = [frame.eta, frame.lam, frame.mu, frame.nu]
    for i in range(4):
        for j in range(i + 1, 4):
            if _dist(pts[i], pts[j]) == 0.0:
                raise ValueError("offsets must be pairwise distinct")
    tau = frame.tau
    bracket = (g_tau(tau, _dist(frame.eta, frame.mu))
               - g_tau(tau, _dist(frame.eta, frame.nu))
               - g_tau(tau, _dist(frame.lam, frame.mu))
               + g_tau(tau, _dist(frame.lam, frame.nu)))
    return frame.S / (math.pi * frame.d * math.sqrt(frame.a * (1.0 - frame.a))) \
        * bracket


def ew_covariance(t, t_tilde, x, y, x_tilde, y_tilde):
    """Equilibrium additive-stochastic-heat-equation covariance of double
    differences, (4 pi)^{-1} times the G_{t - t~} bracket."""
    if not t > t_tilde:
        raise ValueError("need t > t_tilde")
    dt = t - t_tilde
    bracket = (g_tau(dt, _dist(x, x_tilde)) - g_tau(dt, _dist(x, y_tilde))
               - g_tau(dt, _dist(y, x_tilde)) + g_tau(dt, _dist(y, y_tilde)))
    return bracket / (4.0 * math.pi)


def gff_covariance(x, y, x_tilde, y_tilde):
    """Equal-time limit: -(2 pi)^{-1} (ln|x-x~| - ln|x-y~| - ln|y-x~| + ln|y-y~|)."""
    return -(math.log(_dist(x, x_tilde)) - math.log(_dist(x, y_tilde))
             - math.log(_dist(y, x_tilde)) + math.log(_dist(y, y_tilde))) \
        / (2.0 * math.pi)


# ---------------------------------------------------------------------------
# propagator bulk asymptotics
# ---------------------------------------------------------------------------

def bulk_propagator_indices(d, a, T, sigma1, sigma2, N):
    """Integer indices of the bulk scaling window around one characteristic."""
    k = round((1.0 - a) * d * T * N)
    n = round(d * T * N)
    kp = round((1.0 - a) * d * N + sigma1 * math.sqrt((1.0 - a) * d * N))
    np_ = round(d * N + sigma1 * math.sqrt((1.0 - a) * d * N)
                + sigma2 * math.sqrt(a * d * N))
    return k, n, kp, np_


def propagator_gaussian_asymptotic(d, a, T, sigma1, sigma2, N):
    """Gaussian limit of the propagator entry at the bulk scaling window."""
    if not T > 1:
        raise ValueError("need T > 1 (propagation from T0 = 1)")
    tau = (T - 1.0) / T
    return math.exp(-(sigma1 ** 2 + sigma2 ** 2) / (2.0 * tau)) \
        / (2.0 * math.pi * tau * math.sqrt(a * (1.0 - a)) * d * N)


def propagator_exact_log(d, a, T, sigma1, sigma2, N):
    """log of the exact closed-form propagator entry at the rounded indices."""
    k, n, kp, np_ = bulk_propagator_indices(d, a, T, sigma1, sigma2, N)
    return propagator_log_entry(1.0, T, k, n, kp, np_)


# ---------------------------------------------------------------------------
# slow manifold diagnostics
# ---------------------------------------------------------------------------

def bulk_delta(b, W):
    """Delta(W) = sqrt((1-W)^2 + 4 b W), principal branch (Re >= 0)."""
    return cmath.sqrt((1.0 - W) ** 2 + 4.0 * b * W)


def bulk_F(b, W, X):
    return b * cmath.log(X - W) + (1.0 - b) * cmath.log(X) - X


def bulk_G(b, W, U):
    return -b * cmath.log(U) - (1.0 - b) * cmath.log(W + U) + U + W


def bulk_critical_points(b, W):
    """X_pm = (1 + W +- Delta)/2 and U_pm = X_pm - W."""
    delta = bulk_delta(b, W)
    xp = 0.5 * (1.0 + W + delta)
    xm = 0.5 * (1.0 + W - delta)
    return xp, xm, xp - W, xm - W


def bulk_H(b, W):
    """H(W) = b ln((1-W+D)/(1-W-D)) + (1-b) ln((1+W+D)/(1+W-D)) - D."""
    d = bulk_delta(b, W)
    return (b * cmath.log((1.0 - W + d) / (1.0 - W - d))
            + (1.0 - b) * cmath.log((1.0 + W + d) / (1.0 + W - d)) - d)


def bulk_sigma_pm(b, W):
    """Second-derivative factors (1-b)/X_pm^2 + b/U_pm^2 at the critical points."""
    xp, xm, up, um = bulk_critical_points(b, W)
    return (1.0 - b) / xp ** 2 + b / up ** 2, (1.0 - b) / xm ** 2 + b / um ** 2


def fast_manifold_block_constant(b, W):
    """(1/(X+ U+ s+) - 1/(X- U- s-)) * sqrt((W-Omega)(W-Omega_bar)).

    This is the per-block constant produced by summing the two fast-manifold
    Gaussian contributions; it equals 2 identically (the source display
    carries a 4). The limit-covariance statement inherits the square of the
    slip, hence STATEMENT_OVER_DERIVED below.
    """
    xp, xm, up, um = bulk_critical_points(b, W)
    sp, sm = bulk_sigma_pm(b, W)
    om = omega(1.0, b)
    root = cmath.sqrt((W - om) * (W - om.conjugate()))
    return (1.0 / (xp * up * sp) - 1.0 / (xm * um * sm)) * root


# printed limit-covariance normalization over the one derived from the
# fast-manifold identity above (2 per block instead of the printed 4)
STATEMENT_OVER_DERIVED = 4.0


def limit_covariance_derived(d, a, c, b):
    """Large-N covariance limit at the proof-derived normalization, i.e. the
    value the exact finite-N covariances converge to."""
    return limit_covariance_elliptic(d, a, c, b) / STATEMENT_OVER_DERIVED


@dataclass(frozen=True)
class SlowManifoldState:
    b: float
    phi: float
    r: float
    W: complex
    delta: complex
    X_plus: complex
    X_minus: complex
    U_plus: complex
    U_minus: complex
    H: complex


def slow_manifold(b, phi, tol=1e-13):
    """Radius r(phi) in (0, 1] solving Re H(r e^{i phi}) = 0 by bisection.

    Re H decreases in r (dRe H/dr = -Re Delta / r <= 0), diverges at r -> 0
    and is <= 0 on the unit circle, so the bracket is guaranteed.
    """
    if not (0 < b < 1):
        raise ValueError("need b in (0,1)")
    if not 0.0 < phi < math.pi:
        raise ValueError("need phi in (0, pi)")

    def re_h(r):
        return bulk_H(b, r * cmath.exp(1j * phi)).real

    hi = 1.0
    if re_h(hi) > 0.0:
        raise ArithmeticError("Re H positive on the unit circle; no bracket")
    lo = 0.5
    for _ in range(200):
        if re_h(lo) > 0.0:
            break
        lo *= 0.5
        if lo < 1e-12:
            raise ArithmeticError("failed to bracket the slow-manifold radius")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if re_h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    r = 0.5 * (lo + hi)
    W = r * cmath.exp(1j * phi)
    xp, xm, up, um = bulk_critical_points(b, W)
    return SlowManifoldState(b=b, phi=phi, r=r, W=W, delta=bulk_delta(b, W),
                             X_plus=xp, X_minus=xm, U_plus=up, U_minus=um,
                             H=bulk_H(b, W))
