"""Finite-q moment formulas and the eps -> 0 law-of-large-numbers layer.

Three independent evaluation routes for the LLN exponential sums (nested
contour quadrature, Toeplitz determinants of quadrature coefficients, and an
explicit factorial-series determinant), plus ODE residual checks, Toeplitz
determinant identities, and the non-intersecting lattice-path oracle.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import lgamma

import mpmath as mp
import numpy as np

from .contours import (Circle, ContourFamily, InfeasibleGeometry,
                       build_nested_circles, integrate_closed, integrate_product)
from .qcore import Alpha, Plancherel

# ---------------------------------------------------------------------------
# specialization ratios Pi(q z)/Pi(z) and Pi(z/q)/Pi(z)
# ---------------------------------------------------------------------------

def _pi_ratio(z, q, spec):
    if isinstance(spec, Plancherel):
        return np.exp(spec.gamma * (q - 1.0) * z)
    prod = np.ones_like(z)
    for al in spec.alphas:
        prod = prod * (1.0 - al * z)
    return prod


def _pi_ratio_inverse(z, q, spec):
    if isinstance(spec, Plancherel):
        return np.exp(spec.gamma * (1.0 / q - 1.0) * z)
    prod = np.ones_like(z)
    for al in spec.alphas:
        prod = prod / (1.0 - al * z / q)
    return prod


def _check_block_args(n_list, r_list, N):
    if len(n_list) != len(r_list) or not n_list:
        raise ValueError("need matching non-empty n_list/r_list")
    if any(n1 < n2 for n1, n2 in zip(n_list, n_list[1:])):
        raise ValueError("levels must be weakly decreasing: n_1 >= ... >= n_m")
    for n, r in zip(n_list, r_list):
        if not (1 <= n <= N and 0 <= r <= n):
            raise ValueError("need 1 <= n_i <= N and 0 <= r_i <= n_i")


def q_moment(n_list, r_list, params, nodes=96, inner_radius=0.15, margin=None):
    """E[prod_i q^(lam^(n_i)_(n_i) + ... + lam^(n_i)_(n_i - r_i + 1))].

    Nested-contour evaluation; blocks with larger index sit on smaller circles
    (each contour contains q times every inner one and all the a_l, none
    contain 0). Cost guard: sum r_i <= 4.
    """
    _check_block_args(n_list, r_list, params.N)
    blocks = [(n, r) for n, r in zip(n_list, r_list) if r > 0]
    if not blocks:
        return 1.0
    if sum(r for _, r in blocks) > 4:
        raise ValueError("q_moment guarded to sum r_i <= 4")
    q, a = params.q, params.a
    m = len(blocks)
    if margin is None:
        margin = min(0.05, 0.3 * (1.0 - q) / max(m, 1))
    fam = build_nested_circles(q, a, m, inner_radius, margin=margin, nodes=nodes)
    per_var = []
    for i, (_, r) in enumerate(blocks):
        per_var.extend([fam[i]] * r)
    var_family = ContourFamily(per_var, q=None, a=a)

    def integrand(*zv):
        out = None
        offs = []
        ofs = 0
        for n_i, r_i in blocks:
            offs.append(ofs)
            zi = zv[ofs:ofs + r_i]
            blk = (-1.0) ** (r_i * (r_i + 1) // 2) / math.factorial(r_i)
            acc = np.full_like(zi[0], blk, dtype=complex)
            for z in zi:
                w = _pi_ratio(z, q, params.spec) / z ** r_i
                for al in a[:n_i]:
                    w = w * (-al) / (z - al)
                acc = acc * w
            for p in range(r_i):
                for s in range(p + 1, r_i):
                    acc = acc * (zi[p] - zi[s]) ** 2
            out = acc if out is None else out * acc
            ofs += r_i
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(blocks[i][1]):
                    for l in range(blocks[j][1]):
                        zik = zv[offs[i] + k]
                        zjl = zv[offs[j] + l]
                        out = out * q * (zik - zjl) / (zik - q * zjl)
        return out

    val = integrate_product(integrand, var_family, nodes=nodes)
    return float(val.real)


def q_inverse_moment(n_list, r_list, params, nodes=96):
    """E[prod_i q^(-lam^(n_i)_1 - ... - lam^(n_i)_(r_i))].

    All contours share one small circle around the a-cluster that avoids its
    own image under multiplication by 1/q and (alpha case) stays inside the
    disc of radius q min_j alpha_j^{-1}.
    """
    _check_block_args(n_list, r_list, params.N)
    blocks = [(n, r) for n, r in zip(n_list, r_list) if r > 0]
    if not blocks:
        return 1.0
    if sum(r for _, r in blocks) > 4:
        raise ValueError("q_inverse_moment guarded to sum r_i <= 4")
    q, a = params.q, params.a
    m = len(blocks)
    s = sum(a) / len(a)
    spread = max(abs(x - s) for x in a)
    radius = 0.8 * s * (1.0 - q) / (1.0 + q)
    if radius <= spread:
        raise InfeasibleGeometry("a-cluster too spread for the inverse-moment circle")
    if isinstance(params.spec, Alpha):
        if any(params.spec.alphas[j] * a[i] >= q ** m
               for i in range(len(a)) for j in range(len(params.spec.alphas))):
            raise ValueError("inverse moments need a_i alpha_j < q^m")
        cap = q / max(params.spec.alphas)
        if s + radius >= cap:
            radius = 0.8 * (cap - s)
            if radius <= spread:
                raise InfeasibleGeometry("alpha radius cap makes the contour infeasible")
    circ = Circle(s, radius, nodes=nodes)
    var_family = ContourFamily([circ] * sum(r for _, r in blocks), q=None, a=a)

    def integrand(*zv):
        out = None
        offs = []
        ofs = 0
        for n_i, r_i in blocks:
            offs.append(ofs)
            zi = zv[ofs:ofs + r_i]
            blk = (-1.0) ** (r_i * (r_i - 1) // 2) / math.factorial(r_i)
            acc = np.full_like(zi[0], blk, dtype=complex)
            for z in zi:
                w = _pi_ratio_inverse(z, q, params.spec) / z ** r_i
                for al in a[:n_i]:
                    w = w * z / (z - al)
                acc = acc * w
            for p in range(r_i):
                for t in range(p + 1, r_i):
                    acc = acc * (zi[p] - zi[t]) ** 2
            out = acc if out is None else out * acc
            ofs += r_i
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(blocks[i][1]):
                    for l in range(blocks[j][1]):
                        zik = zv[offs[i] + k]
                        zjl = zv[offs[j] + l]
                        out = out * (zik - zjl) / (zik - zjl / q)
        return out

    val = integrate_product(integrand, var_family, nodes=nodes)
    return float(val.real)


# ---------------------------------------------------------------------------
# explicit factorial-series entries
# ---------------------------------------------------------------------------

def g_plancherel(r, tau, m):
    """sum_{i=0}^{m-1} tau^i (r)_{m-1-i} / (i! (m-1-i)!), 0 for m <= 0."""
    if m <= 0:
        return 0.0
    if tau == 0.0:
        return math.exp(lgamma(r + m - 1) - lgamma(r) - lgamma(m))
    lt = math.log(tau)
    tot = 0.0
    for i in range(m):
        tot += math.exp(i * lt - lgamma(i + 1)
                        + lgamma(r + m - 1 - i) - lgamma(r) - lgamma(m - i))
    return tot


def g_plancherel_mp(r, tau, m):
    if m <= 0:
        return mp.mpf(0)
    tau = mp.mpf(tau)
    tot = mp.mpf(0)
    for i in range(m):
        tot += tau ** i / mp.factorial(i) * mp.rf(r, m - 1 - i) / mp.factorial(m - 1 - i)
    return tot


def elementary_mixed(bs, cs):
    """Coefficients e_i of prod_j (b_j + c_j z), exact rationals of the inputs."""
    coeff = [Fraction(1)]
    for b, c in zip(bs, cs):
        fb, fc = Fraction(b), Fraction(c)
        new = [Fraction(0)] * (len(coeff) + 1)
        for i, v in enumerate(coeff):
            new[i] += fb * v
            new[i + 1] += fc * v
        coeff = new
    return coeff


def g_alpha(r, alphas, m):
    """sum_i e_i(1-alpha; alpha) (r)_{m-1-i} / (m-1-i)!, 0 for m <= 0."""
    if m <= 0:
        return 0.0
    e = elementary_mixed([1 - Fraction(al) for al in alphas],
                         [Fraction(al) for al in alphas])
    tot = 0.0
    for i in range(min(len(e) - 1, m - 1) + 1):
        tot += float(e[i]) * math.exp(lgamma(r + m - 1 - i) - lgamma(r) - lgamma(m - i))
    return tot


def _explicit_det(n, r, tau=None, alphas=None):
    if r == 0:
        return 1.0
    if tau is not None:
        mat = np.array([[g_plancherel(r, tau, n + 1 - r + j - i)
                         for j in range(r)] for i in range(r)])
        return math.exp(-tau * r) * float(np.linalg.det(mat))
    mat = np.array([[g_alpha(r, alphas, n + 1 - r + j - i)
                     for j in range(r)] for i in range(r)])
    return float(np.linalg.det(mat))


# ---------------------------------------------------------------------------
# LLN exponential sums, three routes
# ---------------------------------------------------------------------------

def _lln_weight_tail(z, tau=None, alphas=None):
    if tau is not None:
        return np.exp(-tau * z)
    prod = np.ones_like(z)
    for al in alphas:
        prod = prod * (1.0 - al * z)
    return prod


def _symbol_circle(a, nodes=160):
    s = sum(a) / len(a)
    spread = max(abs(x - s) for x in a)
    radius = 0.45 * s + spread
    if radius >= s:
        raise InfeasibleGeometry("a-cluster circle would swallow the origin")
    return Circle(s, radius, nodes=nodes)


def _toeplitz_coeff_fn(n, a, tau=None, alphas=None, nodes=160):
    """A(s) = -(1/2pi i) oint z^{s-1} prod a_l/(a_l - z) tail(z) dz."""
    circ = _symbol_circle(a[:n], nodes=nodes)

    def A(s):
        def f(z):
            w = z ** (s - 1) * _lln_weight_tail(z, tau, alphas)
            for al in a[:n]:
                w = w * al / (al - z)
            return w
        return -integrate_closed(f, circ)
    return A


def lln_exp_sum(n, r, tau=None, alphas=None, a=None, method="explicit", nodes=None):
    """e^{-(x^(n)_n + ... + x^(n)_{n-r+1})} for the limiting profile.

    method: "contour" (r-fold quadrature, Heine-reduced above 4 axes),
    "toeplitz" (determinant of 1-d quadrature coefficients), or "explicit"
    (factorial series; requires a == 1).
    """
    if (tau is None) == (alphas is None):
        raise ValueError("give exactly one of tau / alphas")
    if not 1 <= r <= n:
        if r == 0:
            return 1.0
        raise ValueError("need 1 <= r <= n")
    if a is None:
        a = (1.0,) * n
    if method == "explicit":
        if any(x != 1.0 for x in a[:n]):
            raise ValueError("explicit route requires unit speeds")
        return _explicit_det(n, r, tau=tau, alphas=alphas)

    if method == "toeplitz":
        A = _toeplitz_coeff_fn(n, a, tau=tau, alphas=alphas, nodes=nodes or 160)
        vals = {s: complex(A(s)) for s in range(-(r - 1), r)}
        mat = np.array([[vals[i - j] for j in range(r)] for i in range(r)])
        det = np.linalg.det(mat)
        if abs(det.imag) > 1e-8 * max(1.0, abs(det)):
            raise ArithmeticError("Toeplitz determinant unexpectedly complex")
        return float(det.real)

    if method == "contour":
        circ = _symbol_circle(a[:n], nodes=nodes or 0 or 160)

        def weight(z):
            w = _lln_weight_tail(z, tau, alphas) / z ** r
            for al in a[:n]:
                w = w * al / (al - z)
            return w

        if r <= 4:
            per_axis = nodes or {1: 160, 2: 96, 3: 56, 4: 40}[r]
            fam = ContourFamily([Circle(circ.center, circ.radius, nodes=per_axis)] * r,
                                q=None, a=a[:n])

            def integrand(*zv):
                acc = np.full_like(zv[0], (-1.0) ** (r * (r + 1) // 2)
                                   / math.factorial(r), dtype=complex)
                for z in zv:
                    acc = acc * weight(z)
                for p in range(r):
                    for t in range(p + 1, r):
                        acc = acc * (zv[p] - zv[t]) ** 2
                return acc

            val = integrate_product(integrand, fam, nodes=per_axis)
            return float(val.real)

        # Andreief/Heine reduction of the same integral for the 5- and 6-fold
        # cases: Hankel determinant of 1-d quadrature moments of the full weight
        moms = [complex(integrate_closed(lambda z, t=t: z ** t * weight(z), circ))
                for t in range(2 * r - 1)]
        mat = np.array([[moms[i + j] for j in range(r)] for i in range(r)])
        det = np.linalg.det(mat) * (-1.0) ** (r * (r + 1) // 2)
        return float(det.real)

    raise ValueError("unknown method %r" % (method,))


def lln_x_explicit(n, k, tau, dps=None):
    """x^(n)_k(tau) from the factorial-series determinants (unit speeds).

    dps switches the evaluation to mpmath with that precision; the finite
    differences in the ODE residual checks need it.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    r_hi, r_lo = n + 1 - k, n - k
    if dps is None:
        p_hi = _explicit_det(n, r_hi, tau=tau) * math.exp(tau * r_hi)
        p_lo = _explicit_det(n, r_lo, tau=tau) * math.exp(tau * r_lo)
        return tau - math.log(p_hi / p_lo)
    with mp.workdps(dps):
        def pdet(r):
            if r == 0:
                return mp.mpf(1)
            mat = mp.matrix(r, r)
            for i in range(r):
                for j in range(r):
                    mat[i, j] = g_plancherel_mp(r, tau, n + 1 - r + j - i)
            return mp.det(mat)
        return mp.mpf(tau) - mp.log(pdet(r_hi) / pdet(r_lo))


@dataclass
class LLNProfile:
    """Limit shape x^(n)_k with the y = e^{-x} convention registry.

    x: 0 for k > n, +inf for k <= 0; y: 1 for k > n, 0 for k <= 0.
    """

    N: int
    tau: float = None
    alphas: tuple = None
    values: dict = None

    def x(self, n, k):
        if k <= 0:
            return math.inf
        if k > n or n <= 0:
            return 0.0
        return self.values[(n, k)]

    def y(self, n, k):
        if k <= 0:
            return 0.0
        if k > n or n <= 0:
            return 1.0
        return math.exp(-self.values[(n, k)])

    def interlaces_strictly(self):
        ok = True
        for n in range(2, self.N + 1):
            for k in range(1, n):
                ok &= self.x(n, k + 1) < self.x(n - 1, k) < self.x(n, k)
        return ok


_EXPLICIT_FLOAT_MAX_LEVEL = 10  # float determinant cancellation passes 1e-9 here


def _explicit_level_mp(n, tau, dps):
    """x^(n)_k for every k of one level from mpmath determinants."""
    with mp.workdps(dps):
        dets = [mp.mpf(1)]
        for r in range(1, n + 1):
            mat = mp.matrix(r, r)
            for i in range(r):
                for j in range(r):
                    mat[i, j] = g_plancherel_mp(r, tau, n + 1 - r + j - i)
            dets.append(mp.det(mat))
        out = {}
        for k in range(1, n + 1):
            r = n + 1 - k
            out[k] = float(mp.mpf(tau) - mp.log(dets[r] / dets[r - 1]))
        return out


def lln_profile(N, tau=None, alphas=None, a=None, method=None):
    """Limit shape via ratios of consecutive determinants.

    Unit speeds use the explicit factorial-series route (switching to
    extended precision above level 10, where float cancellation in the
    determinants sets in); general speeds take the Toeplitz route.
    """
    if method is None:
        method = "explicit" if a is None else "toeplitz"
    values = {}
    for n in range(1, N + 1):
        if method == "explicit" and tau is not None and a is None \
                and n > _EXPLICIT_FLOAT_MAX_LEVEL:
            level = _explicit_level_mp(n, tau, dps=50 + 2 * n)
            for k in range(1, n + 1):
                values[(n, k)] = level[k]
            continue
        sums = [lln_exp_sum(n, r, tau=tau, alphas=alphas, a=a, method=method)
                if r else 1.0 for r in range(n + 1)]
        for k in range(1, n + 1):
            ratio = sums[n + 1 - k] / sums[n - k]
            if not ratio > 0.0:
                # extended-precision retry; the determinants are positive but
                # float cancellation can swallow them outright
                if tau is not None and a is None:
                    values[(n, k)] = float(lln_x_explicit(n, k, tau,
                                                          dps=50 + 2 * n))
                    continue
                raise ArithmeticError(
                    "non-positive determinant ratio at (n,k)=(%d,%d)" % (n, k))
            values[(n, k)] = -math.log(ratio)
    return LLNProfile(N=N, tau=tau, alphas=alphas, values=values)


# ---------------------------------------------------------------------------
# ODE residuals
# ---------------------------------------------------------------------------

def pushblock_ode_residual(x_eval, n, k, tau, h, a_n=1.0, use_mp=False):
    """Central-difference dx/dtau minus the push-block ODE right side.

    x_eval(n, k, tau) supplies interior values; boundary conventions
    (0 above the triangle, +inf at k <= 0) are applied here.
    """
    exp = mp.exp if use_mp else math.exp
    if use_mp:
        # exact endpoints tau +- h; float rounding there would dominate
        tau = mp.mpf(tau)
        h = mp.mpf(h)

    def xv(nn, kk, t):
        if kk <= 0:
            return math.inf
        if kk > nn or nn <= 0:
            return mp.mpf(0) if use_mp else 0.0
        return x_eval(nn, kk, t)

    def expdiff(p, q_):
        if q_ == math.inf:
            return mp.mpf(0) if use_mp else 0.0
        return exp(p - q_)

    lhs = (xv(n, k, tau + h) - xv(n, k, tau - h)) / (2 * h)
    xc = xv(n, k, tau)
    e1 = expdiff(xc, xv(n - 1, k - 1, tau))
    e2 = expdiff(xv(n, k + 1, tau), xc)
    e3 = expdiff(xv(n - 1, k, tau), xc)
    rhs = a_n * (1 - e1) * (1 - e2) / (1 - e3)
    return lhs - rhs


def alpha_ode_residual(y_prev, y_curr, n, k, a_n, alpha_t):
    """Residual of the discrete critical-point equation at coordinate (k, n).

    y_prev / y_curr are (n, k) -> y evaluators carrying the y-conventions
    (LLNProfile.y works directly).
    """
    yc = y_curr
    yp = y_prev
    den_l = 1 - yc(n, k) / yc(n - 1, k)
    den_r = alpha_t * (1 - yp(n, k - 1) / yc(n, k))
    if den_l == 0.0 or den_r == 0.0:
        raise ArithmeticError(
            "critical-point equation degenerates at (k,n)=(%d,%d); the profile "
            "has frozen coordinates (needs t > n)" % (k, n))
    lhs = a_n * (1 - yc(n - 1, k - 1) / yc(n, k)) * (1 - yc(n, k) / yc(n, k + 1)) \
        / den_l
    rhs = (1 - yc(n, k) / yp(n, k)) * (1 - yc(n, k - 1) / yc(n, k)) / den_r
    return lhs - rhs


# ---------------------------------------------------------------------------
# Toeplitz determinant identities
# ---------------------------------------------------------------------------

def toeplitz_det(symbol, size, contour):
    """det[phi_{i-j}] with phi_k the contour Fourier coefficients of symbol."""
    if size < 0:
        raise ValueError("size must be >= 0")
    if size == 0:
        return 1.0 + 0.0j
    coeffs = {k: integrate_closed(lambda z, k=k: symbol(z) * z ** (-k - 1), contour)
              for k in range(-(size - 1), size)}
    mat = np.array([[coeffs[i - j] for j in range(size)] for i in range(size)])
    return complex(np.linalg.det(mat))


def toeplitz_identity_residuals(symbol, gamma, M, contour):
    """Relative residuals of the two bilinear Toeplitz determinant identities."""
    phi = symbol
    phi1 = lambda z: (1 + gamma * z) * phi(z)
    phiz = lambda z: z * phi(z)
    phim = lambda z: (1 + gamma * z) / z * phi(z)
    D = lambda f, s: toeplitz_det(f, s, contour)

    t14 = [D(phi, M + 1) * D(phi1, M), -D(phi1, M + 1) * D(phi, M),
           gamma * D(phiz, M + 1) * D(phim, M)]
    t15 = [D(phi, M + 1) * D(phi1, M - 1), -D(phi1, M) * D(phi, M),
           gamma * D(phiz, M) * D(phim, M)]
    r14 = abs(sum(t14)) / max(max(abs(t) for t in t14), 1e-300)
    r15 = abs(sum(t15)) / max(max(abs(t) for t in t15), 1e-300)
    return r14, r15


def matrix_identity_residuals(B, gamma):
    """Relative residuals of the raw two-determinant identities on C = B + gamma*shift(B).

    B must be at least (M+2) x (M+2); the identities are evaluated at
    M = B.shape[0] - 2.
    """
    B = np.asarray(B, dtype=float)
    M = B.shape[0] - 2
    if M < 1:
        raise ValueError("B must be at least 3x3")
    C = B[: M + 1, : M + 1] + gamma * B[: M + 1, 1: M + 2]
    det = np.linalg.det
    t12 = [det(B[: M + 1, : M + 1]) * det(C[1:, 1:]),
           -det(C) * det(B[1: M + 1, 1: M + 1]),
           gamma * det(B[: M + 1, 1: M + 2]) * det(C[1:, :M])]
    t13 = [det(B[: M + 1, : M + 1]) * det(C[1:M, 1:M]),
           -det(C[:M, :M]) * det(B[1: M + 1, 1: M + 1]),
           det(B[:M, 1: M + 1]) * det(C[1: M + 1, :M])]
    r12 = abs(sum(t12)) / max(max(abs(t) for t in t12), 1e-300)
    r13 = abs(sum(t13)) / max(max(abs(t) for t in t13), 1e-300)
    return r12, r13


# ---------------------------------------------------------------------------
# non-intersecting lattice paths (LGV oracle)
# ---------------------------------------------------------------------------

def _row_transfer(states, n):
    """One row of unit-weight horizontal runs; vertex-disjoint transfer."""
    out = {}
    for x, w in states.items():
        r = len(x)

        def rec(k, prefix):
            if k == r:
                out[tuple(prefix)] = out.get(tuple(prefix), 0) + w
                return
            lo = x[k]
            hi = (x[k + 1] - 1) if k + 1 < r else n
            for y in range(lo, hi + 1):
                if prefix and y <= prefix[-1]:
                    continue
                rec(k + 1, prefix + [y])
        rec(0, [])
    return out


def _alpha_row_transfer(states, alpha, n):
    """One weighted row: each path shifts right by one (weight alpha) or stays
    (weight 1 - alpha); configurations stay strictly increasing."""
    al = Fraction(alpha)
    out = {}
    for x, w in states.items():
        r = len(x)
        for mask in range(1 << r):
            y = tuple(x[k] + ((mask >> k) & 1) for k in range(r))
            if any(y[k] >= y[k + 1] for k in range(r - 1)) or y[-1] > n:
                continue
            shifts = bin(mask).count("1")
            out[y] = out.get(y, 0) + w * al ** shifts * (1 - al) ** (r - shifts)
    return out


def lattice_path_partition(n, r, tau=None, alphas=None):
    """Non-intersecting path partition function behind the explicit determinant.

    Plancherel: returns the coefficient list [c_0, c_1, ...] of the polynomial
    p^n_r(tau) (exact Fractions); negative coefficients are a hard failure.
    Alpha: returns the exact Fraction value of the weighted partition function.
    """
    if not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    if (tau is None) == (alphas is None):
        raise ValueError("give exactly one of tau / alphas")
    states = {tuple(range(1, r + 1)): Fraction(1)}
    for _ in range(r):
        states = _row_transfer(states, n)
    target = tuple(range(n + 1 - r, n + 1))

    if alphas is not None:
        for al in alphas:
            states = _alpha_row_transfer(states, al, n)
        return states.get(target, Fraction(0))

    # ordered-jump dynamic program: W_s[v] counts length-s jump sequences
    # keeping configurations strictly increasing; coefficient c_s = W_s/s!
    s_max = sum(target) - sum(range(1, r + 1))
    coeffs = []
    cur = states
    for s in range(s_max + 1):
        w = cur.get(target, Fraction(0))
        c = w / Fraction(math.factorial(s))
        if c < 0:
            raise ArithmeticError("negative lattice-path coefficient")
        coeffs.append(c)
        nxt = {}
        for v, wv in cur.items():
            for k in range(r):
                u = list(v)
                u[k] += 1
                if (k + 1 < r and u[k] >= v[k + 1]) or u[k] > n:
                    continue
                tu = tuple(u)
                nxt[tu] = nxt.get(tu, 0) + wv
        cur = nxt
    return coeffs


def _g_plancherel_poly(r, m):
    """G_{r,tau}(m) as exact tau-polynomial coefficients."""
    if m <= 0:
        return [Fraction(0)]
    return [Fraction(math.factorial(r + m - 2 - i),
                     math.factorial(r - 1) * math.factorial(i) * math.factorial(m - 1 - i))
            for i in range(m)]


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def lattice_path_determinant(n, r, alphas=None):
    """det[G_{r,.}(n+1-r+j-i)] as exact polynomial coefficients (Plancherel)
    or an exact Fraction (alpha); the oracle side of the path identity."""
    if alphas is None:
        entries = [[_g_plancherel_poly(r, n + 1 - r + j - i) for j in range(r)]
                   for i in range(r)]
        det = [Fraction(0)]
        for perm in permutations(range(r)):
            sign = 1
            seen = list(perm)
            # permutation parity by counting inversions
            inv = sum(1 for i in range(r) for j in range(i + 1, r)
                      if seen[i] > seen[j])
            sign = -1 if inv % 2 else 1
            term = [Fraction(sign)]
            for i in range(r):
                term = _poly_mul(term, entries[i][perm[i]])
            if len(det) < len(term):
                det += [Fraction(0)] * (len(term) - len(det))
            for i, c in enumerate(term):
                det[i] += c
        while len(det) > 1 and det[-1] == 0:
            det.pop()
        return det
    t = len(alphas)
    e = elementary_mixed([1 - Fraction(al) for al in alphas],
                         [Fraction(al) for al in alphas])

    def g(m):
        if m <= 0:
            return Fraction(0)
        tot = Fraction(0)
        for i in range(min(t, m - 1) + 1):
            tot += e[i] * Fraction(math.factorial(r + m - 2 - i),
                                   math.factorial(r - 1) * math.factorial(m - 1 - i))
        return tot

    det = Fraction(0)
    for perm in permutations(range(r)):
        inv = sum(1 for i in range(r) for j in range(i + 1, r) if perm[i] > perm[j])
        term = Fraction(-1 if inv % 2 else 1)
        for i in range(r):
            term *= g(n + 1 - r + perm[i] - i)
        det += term
    return det


# ---------------------------------------------------------------------------
# factorial Toeplitz determinants (Desnanot-Jacobi oracle)
# ---------------------------------------------------------------------------

def factorial_toeplitz_det(n, r):
    """M(n, r) = det[1/(n-r+j-i)!] as an exact Fraction (0! convention:
    1/m! = 0 for m < 0)."""
    if r == 0:
        return Fraction(1)

    def entry(i, j):
        m = n - r + j - i
        return Fraction(0) if m < 0 else Fraction(1, math.factorial(m))

    det = Fraction(0)
    for perm in permutations(range(r)):
        inv = sum(1 for i in range(r) for j in range(i + 1, r) if perm[i] > perm[j])
        term = Fraction(-1 if inv % 2 else 1)
        for i in range(r):
            term *= entry(i, perm[i])
        det += term
    return det


def factorial_toeplitz_product(n, r):
    """Closed form prod_{k=0}^{r-1} (r-1-k)! / (n-r+k)!."""
    out = Fraction(1)
    for k in range(r):
        out *= Fraction(math.factorial(r - 1 - k), math.factorial(n - r + k))
    return out


def desnanot_jacobi_check(n, r):
    """|M(n,r) M(n-2,r-2) - (M(n-1,r-1)^2 - M(n,r-1) M(n-2,r-1))| as float."""
    lhs = factorial_toeplitz_det(n, r) * factorial_toeplitz_det(n - 2, r - 2)
    rhs = factorial_toeplitz_det(n - 1, r - 1) ** 2 \
        - factorial_toeplitz_det(n, r - 1) * factorial_toeplitz_det(n - 2, r - 1)
    return abs(float(lhs - rhs))
