"""Diffusively rescaled system at large times: rescaled-Laguerre orthogonal
polynomials, exact covariances, the closed-form propagator, two-time
covariance, a Lyapunov covariance ODE, and the unit-noise linear SDE.

Index linearization over (k, n) uses qcore.coordinate_order: levels
ascending, k ascending within a level. The drift matrix has only three
nonzero entries per row and scales like 1/T.
"""

import math
from math import lgamma

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

from .contours import Circle, ContourFamily, integrate_product
from .fluctuations import sample_gaussian
from .qcore import coordinate_order


def laguerre_poly(n, k, T, z):
    """p^n_k(z) = (k!/(n-k-1)!) sum_l ((n-1-l)!/((k-l)! l!)) (-Tz)^l."""
    if not 0 <= k <= n - 1:
        raise ValueError("need 0 <= k <= n-1")
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    front = math.factorial(k) / math.factorial(n - k - 1)
    for l in range(k + 1):
        coef = front * math.factorial(n - 1 - l) / (math.factorial(k - l)
                                                    * math.factorial(l))
        out = out + coef * (-T * z) ** l
    return out if out.shape else complex(out)


def laguerre_norm(n, k, T):
    """<p^n_k, p^n_k>_n = (-1)^k k! T^(n-1) / (n-1-k)!."""
    if not 0 <= k <= n - 1:
        raise ValueError("need 0 <= k <= n-1")
    return (-1.0) ** k * math.factorial(k) * T ** (n - 1) / math.factorial(n - 1 - k)


def laguerre_inner(n, j, k, T, radius=None, nodes=256):
    """<p^n_j, p^n_k>_n by contour quadrature of e^{Tz} z^{-n} around 0."""
    circ = Circle(0.0, radius or max(n / T, 1.0), nodes=nodes)
    z, w = circ.sample()
    vals = laguerre_poly(n, j, T, z) * laguerre_poly(n, k, T, z) \
        * np.exp(T * z) / z ** n
    return complex(np.sum(vals * w))


def _laguerre_coeffs_mp(n, k, T):
    front = mp.factorial(k) / mp.factorial(n - k - 1)
    return [front * mp.factorial(n - 1 - l) / (mp.factorial(k - l) * mp.factorial(l))
            * (-mp.mpf(T)) ** l for l in range(k + 1)]


def _poly_sq(coeffs):
    d = len(coeffs)
    out = [mp.mpf(0)] * (2 * d - 1)
    for i in range(d):
        for j in range(d):
            out[i + j] += coeffs[i] * coeffs[j]
    return out


def covariance_single(k1, n1, k2, n2, T, method="series", nodes=96):
    """Cov of two single coordinates of the rescaled field at time T.

    "series": exact residue evaluation (Laurent-coefficient convolution of
    e^{Tz} p(z)^2 z^{-n}), mpmath-backed so it scales to n in the hundreds.
    "polynomial": quadrature of the same double-contour formula.
    "quadruple": the half-line x Gauss-Laguerre representation (see
    covariance_quadruple).
    """
    if not (1 <= k1 <= n1 and 1 <= k2 <= n2):
        raise ValueError("coordinates outside the triangular array")
    r1, r2 = n1 + 1 - k1, n2 + 1 - k2
    if n1 < n2:
        n1, r1, n2, r2 = n2, r2, n1, r1
    if method == "series":
        return _series_pair(n1, [r1 - 1], n2, [r2 - 1], T)
    if method == "polynomial":
        return _polynomial_pair(n1, [r1 - 1], n2, [r2 - 1], T, nodes=nodes)
    if method == "quadruple":
        return covariance_quadruple(n1, r1, n2, r2, T, nodes=nodes)
    raise ValueError("unknown method %r" % (method,))


def covariance_block(n1, r1, n2, r2, T, method="series", nodes=64):
    """Cov of the two edge sums (r_i coordinates inward from level edge n_i)."""
    if n1 < n2:
        n1, r1, n2, r2 = n2, r2, n1, r1
    if min(r1, r2) == 0:
        return 0.0
    if method == "series":
        return _series_pair(n1, range(r1), n2, range(r2), T)
    if method == "polynomial":
        return _polynomial_pair(n1, range(r1), n2, range(r2), T, nodes=nodes)
    if method == "multicontour":
        return _multicontour_block(n1, r1, n2, r2, T, nodes=nodes)
    if method == "quadruple":
        tot = 0.0
        for i in range(1, r1 + 1):
            for j in range(1, r2 + 1):
                tot += covariance_quadruple(n1, i, n2, j, T, nodes=nodes)
        return tot
    raise ValueError("unknown method %r" % (method,))


def _series_pair(n1, ks1, n2, ks2, T):
    """Exact sum over Laurent coefficients: Cov = sum_j a_j b_{-1-j} where
    a, b are the coefficient sequences of the two Christoffel-Darboux sums."""
    dps = 40 + 2 * (n1 + n2)
    with mp.workdps(dps):
        Tm = mp.mpf(T)

        def cd_series(n, ks, upto):
            # coefficients of e^{Tz} * sum_k p_k(z)^2 / h_k, orders 0..upto
            tot = [mp.mpf(0)] * (upto + 1)
            for k in ks:
                sq = _poly_sq(_laguerre_coeffs_mp(n, k, T))
                h = (-1) ** k * mp.factorial(k) * Tm ** (n - 1) / mp.factorial(n - 1 - k)
                for m in range(upto + 1):
                    acc = mp.mpf(0)
                    for d in range(0, min(m, len(sq) - 1) + 1):
                        acc += sq[d] * Tm ** (m - d) / mp.factorial(m - d)
                    tot[m] += acc / h
            return tot

        q1 = cd_series(n1, ks1, n1 + n2 - 1)
        q2 = cd_series(n2, ks2, n2 - 1)
        cov = mp.mpf(0)
        for j in range(n2):
            cov += q1[j + n1] * q2[n2 - 1 - j]
        return float(cov)


def _polynomial_pair(n1, ks1, n2, ks2, T, nodes=96):
    """Double-contour quadrature of oint oint rho1(z) rho2(w) / (z - w)."""
    rz = max(n1 / T, 1.0)
    rw = 0.45 * rz
    zc = Circle(0.0, rz, nodes=nodes)
    wc = Circle(0.0, rw, nodes=nodes)
    z, wzq = zc.sample()
    w, wwq = wc.sample()

    def rho(n, ks, zz):
        acc = np.zeros_like(zz)
        for k in ks:
            acc = acc + laguerre_poly(n, k, T, zz) ** 2 / laguerre_norm(n, k, T)
        return acc * np.exp(T * zz) / zz ** n

    K1 = rho(n1, ks1, z)
    K2 = rho(n2, ks2, w)
    kern = 1.0 / (z[:, None] - w[None, :])
    val = np.sum((K1 * wzq)[:, None] * (K2 * wwq)[None, :] * kern)
    if abs(val.imag) > 1e-7 * max(1.0, abs(val)):
        raise ArithmeticError("covariance quadrature came out complex")
    return float(val.real)


def _multicontour_block(n1, r1, n2, r2, T, nodes=64):
    """Ratio of (r1+r2)- and r_i-fold contour integrals around the origin."""
    if r1 + r2 > 4:
        raise ValueError("multicontour blocks guarded to r1 + r2 <= 4")
    rz = max(n1 / T, 1.0)
    outer = Circle(0.0, rz, nodes=nodes)
    inner = Circle(0.0, 0.45 * rz, nodes=nodes)

    def block_weight(zz, n):
        return np.exp(T * zz) / zz ** n

    def numerator(*zv):
        z1 = zv[:r1]
        z2 = zv[r1:]
        acc = np.ones_like(zv[0])
        for z in z1:
            acc = acc * block_weight(z, n1)
        for z in z2:
            acc = acc * block_weight(z, n2)
        for grp in (z1, z2):
            for i in range(len(grp)):
                for j in range(i + 1, len(grp)):
                    acc = acc * (grp[i] - grp[j]) ** 2
        cross = np.zeros_like(zv[0])
        for zi in z1:
            for wj in z2:
                cross = cross + 1.0 / (zi - wj)
        return acc * cross

    def denom(n, r, contour):
        fam = ContourFamily([contour] * r, q=None, a=(), check_origin=False)

        def f(*zv):
            acc = np.ones_like(zv[0])
            for z in zv:
                acc = acc * block_weight(z, n)
            for i in range(r):
                for j in range(i + 1, r):
                    acc = acc * (zv[i] - zv[j]) ** 2
            return acc
        return integrate_product(f, fam, nodes=nodes)

    fam = ContourFamily([outer] * r1 + [inner] * r2, q=None, a=(), check_origin=False)
    num = integrate_product(numerator, fam, nodes=nodes)
    val = num / (denom(n1, r1, outer) * denom(n2, r2, inner))
    if abs(val.imag) > 1e-6 * max(1.0, abs(val)):
        raise ArithmeticError("multicontour covariance came out complex")
    return float(val.real)


def covariance_quadruple(n1, r1, n2, r2, T=1.0, nodes=96, laguerre_order=64):
    """Half-line representation of the single-coordinate covariance:

    each Christoffel-Darboux factor is written as a Gauss-Laguerre integral
    times a small contour integral around the outer variable.
    """
    from numpy.polynomial.laguerre import laggauss
    x_nodes, x_w = laggauss(laguerre_order)
    # weights against e^{-T y}: y = x/T
    y_nodes = x_nodes / T
    y_w = np.exp(np.log(x_w) + x_nodes) / T

    rz = max(n1 / T, 1.0)
    rw = 0.45 * rz
    zc = Circle(0.0, rz, nodes=nodes)
    wc = Circle(0.0, rw, nodes=nodes)

    def K(n, r, zz, small_radius):
        # -(T/z) * int_0^infty (1-y/z)^{r-1} y^{n-r} e^{-Ty} dy
        #        * (1/2pi i) oint_(z) (1-v/z)^{-r} v^{r-1-n} e^{Tv} dv
        iy = np.empty_like(zz)
        for i, z in enumerate(zz):
            vals = (1.0 - y_nodes / z) ** (r - 1) * y_nodes ** (n - r) \
                * np.exp(-T * y_nodes)
            iy[i] = np.sum(vals * y_w)
        iv = np.empty_like(zz)
        for i, z in enumerate(zz):
            c = Circle(z, small_radius, nodes=max(64, 8 * r))
            v, vw = c.sample()
            iv[i] = np.sum((1.0 - v / z) ** (-r) * v ** (r - 1 - n)
                           * np.exp(T * v) * vw)
        return -(T / zz) * iy * iv

    z, wzq = zc.sample()
    w, wwq = wc.sample()
    K1 = K(n1, r1, z, 0.25 * rz)
    K2 = K(n2, r2, w, 0.2 * rw)
    kern = 1.0 / (z[:, None] - w[None, :])
    val = np.sum((K1 * wzq)[:, None] * (K2 * wwq)[None, :] * kern)
    if abs(val.imag) > 1e-6 * max(1.0, abs(val)):
        raise ArithmeticError("quadruple-integral covariance came out complex")
    return float(val.real)


def covariance_matrix(N, T, method="series"):
    """Single-coordinate covariance table over the flat coordinate order."""
    coords = coordinate_order(N)
    M = len(coords)
    out = np.zeros((M, M))
    for i, (k1, n1) in enumerate(coords):
        for j, (k2, n2) in enumerate(coords[: i + 1]):
            v = covariance_single(k1, n1, k2, n2, T, method=method)
            out[i, j] = out[j, i] = v
    return out


# ---------------------------------------------------------------------------
# drift matrix, propagator, two-time covariance
# ---------------------------------------------------------------------------

def drift_matrix(T, N):
    """A(T): diagonal (1-n)/T, (k-1)/T toward (k-1,n-1), (n-k)/T toward (k,n-1)."""
    coords = coordinate_order(N)
    index = {c: i for i, c in enumerate(coords)}
    M = len(coords)
    A = np.zeros((M, M))
    for i, (k, n) in enumerate(coords):
        A[i, i] = (1.0 - n) / T
        if (k - 1, n - 1) in index:
            A[i, index[(k - 1, n - 1)]] = (k - 1) / T
        if (k, n - 1) in index:
            A[i, index[(k, n - 1)]] = (n - k) / T
    return A


def _binom(a, b):
    if b < 0 or b > a:
        return 0.0
    return math.comb(a, b)


def propagator_closed(T0, T, k, n, kp, np_):
    """(T0/T)^(n-1) ((T-T0)/T0)^(n-n') binom(k-1,k'-1) binom(n-k,n'-k')."""
    if not 0 < T0 <= T:
        raise ValueError("need 0 < T0 <= T")
    b = _binom(k - 1, kp - 1) * _binom(n - k, np_ - kp)
    if b == 0.0:
        return 0.0
    base = (T - T0) / T0
    expo = n - np_
    scale = (T0 / T) ** (n - 1)
    if base == 0.0:
        return scale * b if expo == 0 else 0.0
    return scale * base ** expo * b


def propagator_log_entry(T0, T, k, n, kp, np_):
    """log of the closed-form propagator entry (lgamma binomials); -inf when 0."""
    if kp - 1 < 0 or kp - 1 > k - 1 or np_ - kp < 0 or np_ - kp > n - k:
        return -math.inf
    lb1 = lgamma(k) - lgamma(kp) - lgamma(k - kp + 1)
    lb2 = lgamma(n - k + 1) - lgamma(np_ - kp + 1) - lgamma(n - k - np_ + kp + 1)
    return (n - 1) * math.log(T0 / T) + (n - np_) * math.log((T - T0) / T0) + lb1 + lb2


def propagator_matrix(T0, T, N):
    coords = coordinate_order(N)
    M = len(coords)
    Y = np.zeros((M, M))
    for i, (k, n) in enumerate(coords):
        for j, (kp, np_) in enumerate(coords):
            Y[i, j] = propagator_closed(T0, T, k, n, kp, np_)
    return Y


def generator_exponential_entry(S, k, n, kp, np_):
    """exp(S Ahat) entry e^{S(1-n)} (e^S - 1)^(n-n') binom binom (n-n' form)."""
    b = _binom(k - 1, kp - 1) * _binom(n - k, np_ - kp)
    if b == 0.0:
        return 0.0
    base = math.expm1(S)
    expo = n - np_
    if base == 0.0:
        return math.exp(S * (1 - n)) * b if expo == 0 else 0.0
    return math.exp(S * (1 - n)) * base ** expo * b


def propagator_numeric(T0, T, N, rtol=1e-10, atol=1e-12):
    """Integrates dY/dT = A(T) Y from the identity with adaptive RK45."""
    if not 0 < T0 <= T:
        raise ValueError("need 0 < T0 <= T")
    M = len(coordinate_order(N))
    y0 = np.eye(M).ravel()
    if T == T0:
        return np.eye(M)

    def rhs(t, y):
        return (drift_matrix(t, N) @ y.reshape(M, M)).ravel()

    sol = solve_ivp(rhs, (T0, T), y0, rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise RuntimeError("propagator integration failed: %s" % sol.message)
    return sol.y[:, -1].reshape(M, M)


def two_time_covariance(T0, T, cov_T0, N=None):
    """Cross-time covariance block Cov(X(T), X(T0)) = Y^{T0}(T) cov_T0."""
    cov_T0 = np.asarray(cov_T0)
    M = cov_T0.shape[0]
    if cov_T0.shape != (M, M):
        raise ValueError("covariance must be square")
    if N is None:
        N = _N_from_size(M)
    Y = propagator_matrix(T0, T, N)
    if Y.shape[0] != M:
        raise ValueError("dimension mismatch between N and covariance")
    return Y @ cov_T0


def _N_from_size(M):
    N = int((math.isqrt(8 * M + 1) - 1) // 2)
    if N * (N + 1) // 2 != M:
        raise ValueError("matrix size %d is not triangular" % M)
    return N


def lyapunov_covariance(T0, T, N, cov0=None, rtol=1e-10, atol=1e-12):
    """Integrates dXi/dT = A Xi + Xi A^T + I from the exact covariance at T0."""
    coords = coordinate_order(N)
    M = len(coords)
    if cov0 is None:
        cov0 = covariance_matrix(N, T0)
    if T == T0:
        return np.asarray(cov0)

    def rhs(t, y):
        X = y.reshape(M, M)
        A = drift_matrix(t, N)
        return (A @ X + X @ A.T + np.eye(M)).ravel()

    sol = solve_ivp(rhs, (T0, T), np.asarray(cov0).ravel(), rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError("Lyapunov integration failed: %s" % sol.message)
    return sol.y[:, -1].reshape(M, M)


def simulate_diffusive_sde(N, T0, T1, dt, replicas, rng, init_cov=None,
                           init_state=None, record_times=()):
    """Euler-Maruyama for the unit-noise linear system from a Gaussian start.

    Returns (times, snapshots); snapshots are (replicas, M) arrays. Initial
    replicas come from init_state (given samples), a draw from init_cov, or
    zero.
    """
    if T0 <= 0:
        raise ValueError("need T0 > 0: the drift matrix is singular at T = 0")
    coords = coordinate_order(N)
    index = {c: i for i, c in enumerate(coords)}
    M = len(coords)
    if init_state is not None:
        X = np.array(init_state, dtype=float)
        if X.shape != (replicas, M):
            raise ValueError("init_state must be (replicas, M)")
    elif init_cov is None:
        X = np.zeros((replicas, M))
    else:
        X = sample_gaussian(np.asarray(init_cov), replicas, rng)
    diag = np.array([1.0 - n for (k, n) in coords])
    i_diag = np.array([index.get((k - 1, n - 1), -1) for (k, n) in coords])
    w_diag = np.array([float(k - 1) for (k, n) in coords])
    i_below = np.array([index.get((k, n - 1), -1) for (k, n) in coords])
    w_below = np.array([float(n - k) for (k, n) in coords])

    record = sorted(set([T1] + [float(t) for t in record_times]))
    out_times, out = [], []
    nsteps = int(round((T1 - T0) / dt))
    t = T0
    ri = 0
    zero_col = np.zeros((replicas, 1))
    sqdt = math.sqrt(dt)
    for step in range(nsteps):
        Xe = np.concatenate([X, zero_col], axis=1)
        drift = (diag * X + w_diag * Xe[:, i_diag] + w_below * Xe[:, i_below]) / t
        X = X + drift * dt + sqdt * rng.standard_normal((replicas, M))
        if not np.isfinite(X).all() or np.abs(X).max() > 1e8:
            raise FloatingPointError("diffusive SDE blew up at T=%.4f" % t)
        t = T0 + (step + 1) * dt
        while ri < len(record) and record[ri] <= t + 1e-12:
            out_times.append(record[ri])
            out.append(X.copy())
            ri += 1
    return out_times, out
