"""Gaussian fluctuation layer: covariance of the eps -> 0 fluctuation field
around the limit shape, the finite-N linear SDE system it satisfies, and the
Monte Carlo estimators that close the loop against simulation.

The fluctuation field is the eps^{-1/2}-scale correction: lambda = eps^{-1} x
+ eps^{-1/2} * (fluctuation). Everything below assumes unit speeds unless a
route explicitly supports general ones.
"""

import math
from dataclasses import dataclass

import numpy as np

from .contours import Circle, ContourFamily, integrate_product
from .moments import lln_exp_sum, lln_profile
from .qcore import coordinate_order

# block covariances: C(n1, r1; n2, r2) of sums of r_i fluctuation coordinates
# counted inward from the edge of level n_i


def _unit_weight_moment(p, n, tau):
    """(1/2pi i) oint z^p (1-z)^{-n} e^{-tau z} dz around z = 1, exactly.

    Residue series: (-1)^n e^{-tau} sum_{j<n} binom(p, j)(-tau)^{n-1-j}/(n-1-j)!.
    """
    out = 0.0
    binom = 1.0
    for j in range(n):
        out += binom * (-tau) ** (n - 1 - j) / math.factorial(n - 1 - j)
        binom *= (p - j) / (j + 1)
    return (-1.0) ** n * math.exp(-tau) * out


def _monic_ops(moments, r):
    """Monic orthogonal polynomials and norms for a complex bilinear form
    given its Hankel moments m_0..m_{2r-2}."""
    polys, norms = [], []
    for k in range(r):
        if k == 0:
            coeffs = np.array([1.0])
        else:
            A = np.array([[moments[i + j] for j in range(k)] for i in range(k)])
            b = -np.array([moments[i + k] for i in range(k)])
            low = np.linalg.solve(A, b)
            coeffs = np.concatenate([low, [1.0]])
        h = sum(coeffs[j] * moments[j + k] for j in range(k + 1))
        if abs(h) < 1e-13 * max(abs(moments[2 * k]), 1.0):
            raise ArithmeticError("degenerate orthogonal-polynomial norm h_%d" % k)
        polys.append(coeffs)
        norms.append(h)
    return polys, norms


def _correlation_kernel(n, r, tau, z):
    """One-point function K_r(z) of the ensemble with weight
    z^{-r} (1-z)^{-n} e^{-tau z}; (1/2pi i) oint K_r = r."""
    moments = [_unit_weight_moment(t - r, n, tau) for t in range(2 * r - 1)]
    polys, norms = _monic_ops(moments, r)
    w = z ** (-float(r)) * (1.0 - z) ** (-float(n)) * np.exp(-tau * z)
    acc = np.zeros_like(z)
    for coeffs, h in zip(polys, norms):
        val = np.zeros_like(z)
        for c in coeffs[::-1]:
            val = val * z + c
        acc = acc + val * val / h
    return w * acc


def covariance_block(n1, r1, n2, r2, tau, method="auto", nodes=None):
    """Cov of the two edge sums, unit speeds, via nested contour integrals.

    method "direct" evaluates the (r1+r2)-fold integral (guarded to <= 4
    axes); "reduced" isolates the two interacting variables by symmetry and
    integrates the product of one-point functions (any r); "auto" picks.
    """
    if n1 < n2:
        n1, r1, n2, r2 = n2, r2, n1, r1
    if min(r1, r2) == 0:
        return 0.0
    if not (1 <= r1 <= n1 and 1 <= r2 <= n2):
        raise ValueError("need 0 <= r_i <= n_i")
    if method == "auto":
        method = "direct" if r1 + r2 <= 4 else "reduced"

    outer = Circle(1.0, 0.45, nodes=nodes or 96)
    inner = Circle(1.0, 0.2, nodes=nodes or 96)

    if method == "reduced":
        z, wz = outer.sample()
        w, ww = inner.sample()
        K1 = _correlation_kernel(n1, r1, tau, z)
        K2 = _correlation_kernel(n2, r2, tau, w)
        kern = z[:, None] / (z[:, None] - w[None, :])
        val = -np.sum((K1 * wz)[:, None] * (K2 * ww)[None, :] * kern)
        if abs(val.imag) > 1e-7 * max(1.0, abs(val)):
            raise ArithmeticError("covariance block came out complex")
        return float(val.real)

    if method != "direct":
        raise ValueError("unknown method %r" % (method,))
    if r1 + r2 > 4:
        raise ValueError("direct block covariance guarded to r1 + r2 <= 4")

    fam = ContourFamily([outer] * r1 + [inner] * r2, q=None, a=(1.0,))

    def integrand(*zv):
        z1 = zv[:r1]
        z2 = zv[r1:]
        acc = np.full_like(zv[0],
                           (-1.0) ** (r1 * (r1 + 1) // 2 + r2 * (r2 + 1) // 2)
                           / (math.factorial(r1) * math.factorial(r2)),
                           dtype=complex)
        for z in z1:
            acc = acc * np.exp(-tau * z) / (z ** r1 * (1.0 - z) ** n1)
        for z in z2:
            acc = acc * np.exp(-tau * z) / (z ** r2 * (1.0 - z) ** n2)
        for grp in (z1, z2):
            for i in range(len(grp)):
                for j in range(i + 1, len(grp)):
                    acc = acc * (grp[i] - grp[j]) ** 2
        cross = np.zeros_like(zv[0])
        for zi in z1:
            for wj in z2:
                cross = cross + zi / (zi - wj)
        return acc * (-cross)

    num = integrate_product(integrand, fam, nodes=nodes or {2: 96, 3: 64, 4: 44}[r1 + r2])
    den = (lln_exp_sum(n1, r1, tau=tau, method="explicit")
           * lln_exp_sum(n2, r2, tau=tau, method="explicit"))
    val = num / den
    if abs(val.imag) > 1e-7 * max(1.0, abs(val)):
        raise ArithmeticError("covariance block came out complex")
    return float(val.real)


def covariance(k1, n1, k2, n2, tau, method="auto", _memo=None):
    """Single-coordinate covariance by second differences of block sums."""
    r1 = n1 + 1 - k1
    r2 = n2 + 1 - k2
    if not (1 <= k1 <= n1 and 1 <= k2 <= n2):
        raise ValueError("coordinates outside the triangular array")

    def C(a, b):
        if a <= 0 or b <= 0:
            return 0.0
        key = (n1, a, n2, b)
        if _memo is not None and key in _memo:
            return _memo[key]
        val = covariance_block(n1, a, n2, b, tau, method=method)
        if _memo is not None:
            _memo[key] = val
        return val

    return C(r1, r2) - C(r1 - 1, r2) - C(r1, r2 - 1) + C(r1 - 1, r2 - 1)


@dataclass
class FluctuationCovariance:
    """Symmetric covariance table over the flat (k, n) coordinate order."""

    values: np.ndarray
    tau: float
    coords: list
    se: np.ndarray = None
    provenance: str = "formula"

    def is_psd(self, tol_scale=1e-8):
        ev = np.linalg.eigvalsh(0.5 * (self.values + self.values.T))
        return ev.min() >= -tol_scale * max(np.trace(self.values), 1e-300)


def covariance_matrix(N, tau, method="reduced"):
    """Full single-coordinate table; the reduced route scales to any r."""
    coords = coordinate_order(N)
    M = len(coords)
    out = np.zeros((M, M))
    memo = {}
    for i, (k1, n1) in enumerate(coords):
        for j, (k2, n2) in enumerate(coords[: i + 1]):
            v = covariance(k1, n1, k2, n2, tau, method=method, _memo=memo)
            out[i, j] = out[j, i] = v
    return FluctuationCovariance(values=out, tau=tau, coords=coords)


# ---------------------------------------------------------------------------
# SDE system for the fluctuation field (unit speeds)
# ---------------------------------------------------------------------------

def sde_coefficients(profile, n, k):
    """(sigma, a, b, c) drift/diffusion coefficients at coordinate (k, n).

    profile supplies x-values; ratios of y's are taken in log space so the
    large-time regime stays finite. Boundary conventions are the profile's.
    """
    x = profile.x

    def ratio(na, ka, nb, kb):
        # y^(na)_ka / y^(nb)_kb = exp(x(nb,kb) - x(na,ka))
        xa, xb = x(na, ka), x(nb, kb)
        if xa == math.inf:
            return 0.0
        return math.exp(xb - xa)

    r1 = ratio(n - 1, k - 1, n, k)
    r2 = ratio(n, k, n, k + 1)
    r3 = ratio(n, k, n - 1, k)
    den = 1.0 - r3
    if den <= 0.0:
        raise ArithmeticError("vanishing 1 - y^(n)_k / y^(n-1)_k at (%d,%d)" % (k, n))
    sigma = math.sqrt((1.0 - r1) * (1.0 - r2) / den)
    a = r1 * (1.0 - r2) / den
    b = r2 * (1.0 - r1) / den
    c = r3 * (1.0 - r1) * (1.0 - r2) / den ** 2
    return sigma, a, b, c


def _neighbor_indices(coords):
    index = {c: i for i, c in enumerate(coords)}
    M = len(coords)
    im_diag = np.full(M, -1)   # (k-1, n-1)
    im_up = np.full(M, -1)     # (k+1, n)
    im_below = np.full(M, -1)  # (k, n-1)
    for i, (k, n) in enumerate(coords):
        im_diag[i] = index.get((k - 1, n - 1), -1)
        im_up[i] = index.get((k + 1, n), -1)
        im_below[i] = index.get((k, n - 1), -1)
    return im_diag, im_up, im_below


def simulate_fluctuation_sde(N, tau0, tau1, dt, replicas, rng, init="gaussian",
                             record_times=()):
    """Euler-Maruyama integration of the linear fluctuation SDE system.

    Starts from the exact Gaussian law at tau0 (or from zero). Returns
    (times, snapshots) where snapshots[t] is a (replicas, M) array over the
    flat coordinate order.
    """
    if tau0 <= 0:
        raise ValueError("need tau0 > 0: coefficients are singular at the packed start")
    coords = coordinate_order(N)
    M = len(coords)
    im_diag, im_up, im_below = _neighbor_indices(coords)
    if init == "gaussian":
        cov = covariance_matrix(N, tau0).values
        X = sample_gaussian(cov, replicas, rng)
    elif init == "zero":
        X = np.zeros((replicas, M))
    else:
        raise ValueError("init must be 'gaussian' or 'zero'")

    record = sorted(set([tau1] + [float(t) for t in record_times]))
    out_times, out = [], []
    nsteps = int(round((tau1 - tau0) / dt))
    t = tau0
    ri = 0
    zero_col = np.zeros((replicas, 1))
    for step in range(nsteps):
        profile = lln_profile(N, tau=t)
        sig = np.empty(M)
        ca = np.empty(M)
        cb = np.empty(M)
        cc = np.empty(M)
        for i, (k, n) in enumerate(coords):
            sig[i], ca[i], cb[i], cc[i] = sde_coefficients(profile, n, k)
        Xe = np.concatenate([X, zero_col], axis=1)  # index -1 reads as 0
        drift = (-ca * (X - Xe[:, im_diag])
                 + cb * (X - Xe[:, im_up])
                 - cc * (X - Xe[:, im_below]))
        X = X + drift * dt + sig * math.sqrt(dt) * rng.standard_normal((replicas, M))
        if not np.isfinite(X).all() or np.abs(X).max() > 1e8:
            raise FloatingPointError("fluctuation SDE blew up at tau=%.4f" % t)
        t = tau0 + (step + 1) * dt
        while ri < len(record) and record[ri] <= t + 1e-12:
            out_times.append(record[ri])
            out.append(X.copy())
            ri += 1
    return out_times, out


def sample_gaussian(cov, replicas, rng, clip_scale=1e-10):
    """Draws from N(0, cov) via eigen-factorization with tiny-negative clipping."""
    cov = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(cov)
    floor = -clip_scale * max(np.trace(cov), 1e-300)
    if vals.min() < floor:
        raise ArithmeticError("covariance is not PSD beyond quadrature noise")
    vals = np.clip(vals, 0.0, None)
    root = vecs * np.sqrt(vals)
    return rng.standard_normal((replicas, len(vals))) @ root.T


def empirical_fluctuation_covariance(flat_states, eps, profile, tau):
    """Covariance of eps^{-1/2} (eps*lambda - x(tau)) with standard errors.

    flat_states: (replicas, M) integer array in the flat coordinate order.
    """
    R = flat_states.shape[0]
    if R < 100:
        raise ValueError("need at least 100 replicas for a covariance estimate")
    coords = coordinate_order(profile.N)
    xs = np.array([profile.x(n, k) for (k, n) in coords])
    xi = (eps * flat_states - xs) / math.sqrt(eps)
    C = np.cov(xi.T, ddof=1)
    C = np.atleast_2d(C)
    d = np.diag(C)
    se = np.sqrt((np.outer(d, d) + C ** 2) / (R - 1))
    return FluctuationCovariance(values=C, tau=tau, coords=coords, se=se,
                                 provenance="monte-carlo")
