"""q-deformed special functions, partitions/interlacing arrays, and exact samplers.

Everything here is pure: samplers take an explicit random source so parallel
replicas own independent streams.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

INF = math.inf

# stop extending infinite q-products once the next factor is within this of 1
_POCHHAMMER_ATOL = 1e-16
# inverse-CDF samplers stop once this much cumulative mass is covered;
# the remainder is assigned to the last computed atom
SAMPLER_TAIL_MASS = 1e-15


def q_pochhammer(a, q, n=INF):
    """(a;q)_n = prod_{i=0}^{n-1} (1 - q^i a), with n = inf allowed for |q| < 1."""
    if math.isnan(a) or math.isnan(q):
        raise ValueError("NaN parameter in q_pochhammer")
    if n is INF or n == INF:
        if not abs(q) < 1:
            raise ValueError("infinite q-Pochhammer requires |q| < 1")
        out = 1.0
        term = float(a)
        while abs(term) >= _POCHHAMMER_ATOL:
            out *= 1.0 - term
            term *= q
        return out
    n = int(n)
    if n < 0:
        raise ValueError("q_pochhammer order must be >= 0")
    out = 1.0
    qa = float(a)
    for _ in range(n):
        out *= 1.0 - qa
        qa *= q
    return out


def log_q_pochhammer(a, q, n):
    """ln (a;q)_n as a sum of log factors; survives severe underflow."""
    if not a < 1:
        raise ValueError("log form needs every factor positive (a < 1)")
    out = 0.0
    qa = float(a)
    for _ in range(int(n)):
        out += math.log1p(-qa)
        qa *= q
    return out


def qq_factorial(q, m):
    """(q;q)_m for integer m >= 0."""
    if m < 0:
        raise ValueError("negative (q;q)_m index")
    out = 1.0
    p = q
    for _ in range(int(m)):
        out *= 1.0 - p
        p *= q
    return out


def g_integral(a, b):
    """int_0^b ln(1 - a e^{-s}) ds for a in [0,1], b >= 0.

    The a = 1 endpoint has an integrable log singularity at s = 0.
    """
    if a > 1.0 or a < 0.0:
        raise ValueError("g_integral requires a in [0, 1]")
    if b < 0.0:
        raise ValueError("g_integral requires b >= 0")
    if a == 0.0 or b == 0.0:
        return 0.0
    val, _ = quad(lambda s: math.log1p(-a * math.exp(-s)), 0.0, b,
                  limit=200, epsabs=1e-13, epsrel=1e-12)
    return val


def q_geometric_pmf(q, alpha, s):
    """P(s) = alpha^s (alpha;q)_inf / (q;q)_s."""
    if not (0 < q < 1 and 0 < alpha < 1):
        raise ValueError("q-geometric requires q, alpha in (0,1)")
    return alpha ** s * q_pochhammer(alpha, q) / qq_factorial(q, s)


def sample_q_geometric(q, alpha, rng):
    """Exact inverse-CDF draw from the q-geometric law."""
    if alpha == 0.0:
        return 0
    u = rng.random()
    head = q_pochhammer(alpha, q)  # P(0)
    p = head
    cum = p
    s = 0
    ratio_q = q
    while u > cum:
        if cum >= 1.0 - SAMPLER_TAIL_MASS:
            break
        s += 1
        p *= alpha / (1.0 - ratio_q)
        ratio_q *= q
        cum += p
    return s


def q_hahn_weights(q, xi, eta, c):
    """Normalized weight table of the q-Hahn law phi_{q,xi,eta}(s|c) on {0..c}.

    Works for both the q in (0,1) regime and the inverse regime (q > 1 with
    xi = q^-a-style parameters); any genuinely negative weight is a
    parameter-regime error.
    """
    c = int(c)
    if c < 0:
        raise ValueError("q-Hahn support bound must be >= 0")
    w = np.empty(c + 1)
    for s in range(c + 1):
        num = (xi ** s
               * q_pochhammer(eta / xi if xi != 0 else 0.0, q, s)
               * q_pochhammer(xi, q, c - s))
        den = (q_pochhammer(eta, q, c)
               * qq_factorial(q, s) * qq_factorial(q, c - s) / qq_factorial(q, c))
        w[s] = num / den
    tot = w.sum()
    if tot <= 0 or np.any(w < -1e-12 * abs(tot)):
        raise ValueError("q-Hahn parameters outside the nonnegative regime")
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def q_hahn_pmf(q, xi, eta, s, c):
    """phi_{q,xi,eta}(s|c); c may be math.inf (requires |q| < 1)."""
    if c is INF or c == INF:
        if not 0 < q < 1:
            raise ValueError("infinite-support q-Hahn requires q in (0,1)")
        if s < 0:
            return 0.0
        val = (xi ** s * q_pochhammer(eta / xi if xi != 0 else 0.0, q, s)
               * q_pochhammer(xi, q)
               / (q_pochhammer(eta, q) * qq_factorial(q, s)))
        if val < -1e-12:
            raise ValueError("q-Hahn parameters outside the nonnegative regime")
        return max(val, 0.0)
    if s < 0 or s > c:
        return 0.0
    return q_hahn_weights(q, xi, eta, c)[int(s)]


def sample_q_hahn(q, xi, eta, c, rng):
    """Exact inverse-CDF draw over {0..c} (finite c)."""
    w = q_hahn_weights(q, xi, eta, c)
    u = rng.random()
    cum = 0.0
    for s, p in enumerate(w):
        cum += p
        if u <= cum:
            return s
    return len(w) - 1


# ---------------------------------------------------------------------------
# partitions and interlacing arrays
# ---------------------------------------------------------------------------

def is_partition(parts):
    return all(parts[i] >= parts[i + 1] >= 0 for i in range(len(parts) - 1)) \
        and (len(parts) == 0 or parts[-1] >= 0)


def interlaces(lam, mu):
    """mu interlaces with lam (mu ⪯ lam): lam_i >= mu_i >= lam_{i+1} for all i."""
    L = max(len(lam), len(mu)) + 1
    get = lambda p, i: p[i] if i < len(p) else 0
    return all(get(lam, i) >= get(mu, i) >= get(lam, i + 1) for i in range(L))


def phi_psi_weights(lam, mu, q):
    """Branching weights (phi, psi) for a pair lam ⪰ mu.

    Evaluated through finite (q;q)_m ratios; both are strictly positive for
    valid interlacing input.
    """
    lam = list(lam)
    mu = list(mu)
    if not interlaces(lam, mu):
        raise ValueError("phi/psi weights need interlacing partitions lam ⪰ mu")
    L = len(lam)
    get = lambda p, i: p[i] if i < len(p) else 0
    phi = 1.0
    psi = 1.0
    for i in range(L):
        li, li1 = get(lam, i), get(lam, i + 1)
        mi, mi1 = get(mu, i), get(mu, i + 1)
        common = qq_factorial(q, li - mi) * qq_factorial(q, mi - li1)
        phi *= qq_factorial(q, mi - mi1) / common
        psi *= qq_factorial(q, li - li1) / common
    return phi, psi


class InterlacingArray:
    """Triangular array lam^{(n)}_k, 1 <= k <= n <= N, of non-negative integers.

    Convention registry (never stored): lam^{(n)}_k = +inf for k <= 0 and
    lam^{(n)}_k = 0 for k > n.
    """

    __slots__ = ("levels",)

    def __init__(self, levels):
        self.levels = [list(map(int, lv)) for lv in levels]
        for n, lv in enumerate(self.levels, start=1):
            if len(lv) != n:
                raise ValueError("level %d must have %d entries" % (n, n))

    @classmethod
    def packed(cls, N):
        return cls([[0] * n for n in range(1, N + 1)])

    @property
    def N(self):
        return len(self.levels)

    def get(self, n, k):
        """Entry with the boundary conventions applied."""
        if k <= 0:
            return INF
        if n <= 0 or k > n:
            return 0
        return self.levels[n - 1][k - 1]

    def set(self, n, k, value):
        self.levels[n - 1][k - 1] = value

    def copy(self):
        return InterlacingArray([list(lv) for lv in self.levels])

    def flatten(self):
        """Level-major list: (1,1), (2,1), (2,2), (3,1), ..."""
        return [v for lv in self.levels for v in lv]

    def validate(self):
        """True iff every interlacing inequality holds."""
        for n in range(2, self.N + 1):
            for k in range(1, n):
                if not (self.get(n, k + 1) <= self.get(n - 1, k) <= self.get(n, k)):
                    return False
        # within-level monotonicity is implied but cheap to confirm
        for lv in self.levels:
            if any(lv[i] < lv[i + 1] for i in range(len(lv) - 1)):
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, InterlacingArray) and self.levels == other.levels

    def __repr__(self):
        return "InterlacingArray(%r)" % (self.levels,)


def validate_interlacing(arr):
    return arr.validate()


def coordinate_order(N):
    """Flat (k, n) order shared by every module: levels ascending, k ascending
    within a level — (1,1), (1,2), (2,2), (1,3), (2,3), (3,3), ..."""
    return [(k, n) for n in range(1, N + 1) for k in range(1, n + 1)]


# ---------------------------------------------------------------------------
# model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Plancherel:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("Plancherel gamma must be > 0")


@dataclass(frozen=True)
class Alpha:
    alphas: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(x) for x in self.alphas))
        if any(x <= 0 for x in self.alphas):
            raise ValueError("alpha parameters must be positive")


@dataclass(frozen=True)
class ModelParams:
    """q (or eps with q = e^{-eps}), level speeds a, and a specialization."""

    eps: float
    a: tuple
    spec: object = None
    q: float = field(init=False)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        object.__setattr__(self, "q", math.exp(-self.eps))
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if any(x <= 0 for x in self.a):
            raise ValueError("speeds a must be positive")
        if isinstance(self.spec, Alpha):
            for ai in self.a:
                for al in self.spec.alphas:
                    if not ai * al < 1:
                        raise ValueError("alpha admissibility a_i*alpha_j < 1 violated")

    @classmethod
    def from_q(cls, q, a, spec=None):
        if not 0 < q < 1:
            raise ValueError("q must lie in (0,1)")
        return cls(eps=-math.log(q), a=tuple(a), spec=spec)

    @property
    def N(self):
        return len(self.a)
