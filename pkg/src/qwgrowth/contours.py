"""Complex-contour and half-line quadrature, plus nested-circle geometry.

Closed analytic curves use the trapezoid rule (spectrally accurate); open
arcs use Gauss-Legendre in the parameter. A node-doubling check guards every
closed integral, with an arbitrary-precision retry hook for steep integrands.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class QuadratureError(RuntimeError):
    pass


class InfeasibleGeometry(ValueError):
    pass


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float
    nodes: int = 128

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be > 0")
        if self.nodes < 8:
            raise ValueError("need at least 8 nodes")

    def sample(self, nodes=None):
        """Quadrature nodes z_j and weights for (1/2pi i) oint f dz."""
        m = int(nodes or self.nodes)
        theta = TWO_PI * np.arange(m) / m
        e = np.exp(1j * theta)
        z = self.center + self.radius * e
        w = self.radius * e / m  # z'(theta) * dtheta / (2 pi i) = rho e^{i th} / m
        return z, w

    def contains(self, point, margin=0.0):
        return abs(point - self.center) < self.radius - margin

    def to_dict(self):
        return {"kind": "circle", "center": [self.center.real, self.center.imag],
                "radius": self.radius, "nodes": self.nodes}


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex
    nodes: int = 128

    def sample(self, nodes=None):
        """Gauss-Legendre nodes/weights for (1/2pi i) int_start^end f dz."""
        m = int(nodes or self.nodes)
        x, w = np.polynomial.legendre.leggauss(m)
        mid = 0.5 * (self.start + self.end)
        half = 0.5 * (self.end - self.start)
        z = mid + half * x
        return z, w * half / (2j * math.pi)

    def to_dict(self):
        return {"kind": "segment",
                "start": [self.start.real, self.start.imag],
                "end": [self.end.real, self.end.imag], "nodes": self.nodes}


@dataclass(frozen=True)
class SineArc:
    """Vertical chord center + i*half_height*sin(theta), theta in [-pi/2, pi/2].

    The substitution regularizes endpoint inverse-square-root factors:
    dW / sqrt((W - top)(W - bottom)) = i dtheta exactly on the chord.
    """

    center: float
    half_height: float
    nodes: int = 201

    def sample(self, nodes=None):
        m = int(nodes or self.nodes)
        theta, w = np.polynomial.legendre.leggauss(m)
        theta = theta * (math.pi / 2)
        w = w * (math.pi / 2)
        z = self.center + 1j * self.half_height * np.sin(theta)
        dz = 1j * self.half_height * np.cos(theta)
        return z, w * dz / (2j * math.pi)

    def theta_sample(self, nodes=None):
        """(theta, GL weights) for integrands already reduced to d(theta)."""
        m = int(nodes or self.nodes)
        theta, w = np.polynomial.legendre.leggauss(m)
        return theta * (math.pi / 2), w * (math.pi / 2)

    def to_dict(self):
        return {"kind": "sine_arc", "center": self.center,
                "half_height": self.half_height, "nodes": self.nodes}


def integrate_closed(f, contour, rel_tol=1e-9, mp_fallback=None):
    """(1/2pi i) oint f(z) dz with a node-doubling consistency check.

    f must accept a complex ndarray. If doubling disagrees beyond rel_tol the
    extended-precision fallback is invoked (callable of no args), else a
    QuadratureError is raised.
    """
    z, w = contour.sample()
    v1 = f(z)
    if not np.all(np.isfinite(v1)):
        raise QuadratureError("non-finite integrand values on contour")
    coarse = np.sum(v1 * w)
    z2, w2 = contour.sample(nodes=2 * contour.nodes)
    fine = np.sum(f(z2) * w2)
    scale = max(abs(fine), 1.0)
    if abs(fine - coarse) > rel_tol * scale:
        if mp_fallback is not None:
            return mp_fallback()
        raise QuadratureError(
            "node-doubling disagreement %.3e on closed contour" % abs(fine - coarse))
    return fine


class ContourFamily:
    """Ordered contours, outermost first, with a nesting certificate.

    For the moment formulas: contour i must contain q * contour j for every
    j > i, contain all required a_l, and exclude 0.
    """

    def __init__(self, contours, q=None, a=(), check_origin=True):
        self.contours = list(contours)
        self.q = q
        self.a = tuple(a)
        self.check_origin = check_origin

    def __len__(self):
        return len(self.contours)

    def __getitem__(self, i):
        return self.contours[i]

    def certify(self, samples=64):
        """Point-sampling check of every nesting/containment/exclusion claim."""
        for i, outer in enumerate(self.contours):
            for pt in self.a:
                if not outer.contains(pt):
                    raise InfeasibleGeometry(
                        "contour %d does not contain a = %s" % (i, pt))
            if self.check_origin and outer.contains(0.0):
                raise InfeasibleGeometry("contour %d contains the origin" % i)
            if self.q is None:
                continue
            for j in range(i + 1, len(self.contours)):
                inner = self.contours[j]
                zs, _ = inner.sample(nodes=samples)
                for z in zs:
                    if not outer.contains(self.q * z):
                        raise InfeasibleGeometry(
                            "contour %d does not contain q * contour %d" % (i, j))
        return True

    def to_json(self):
        return json.dumps({"q": self.q, "a": list(self.a),
                           "contours": [c.to_dict() for c in self.contours]})


def build_nested_circles(q, a, levels, inner_radius, margin=0.05, nodes=128):
    """Concentric circles around the a-cluster satisfying the q-nesting rules.

    Radii follow rho_i = (1-q) s + q rho_{i+1} + margin (s = cluster center),
    which certifies that circle i contains q times circle i+1; all circles
    contain the a's and exclude 0.
    """
    a = tuple(float(x) for x in a)
    if not a or any(x <= 0 for x in a):
        raise InfeasibleGeometry("need a cluster of positive a_l")
    s = sum(a) / len(a)
    spread = max(abs(x - s) for x in a)
    if inner_radius <= spread:
        raise InfeasibleGeometry(
            "inner radius %.3g does not cover the a-cluster spread %.3g"
            % (inner_radius, spread))
    radii = [float(inner_radius)]
    for _ in range(levels - 1):
        radii.append((1.0 - q) * s + q * radii[-1] + margin)
    radii.reverse()  # outermost first
    if radii[0] >= s:
        raise InfeasibleGeometry(
            "outermost radius %.3g reaches the origin (center %.3g)" % (radii[0], s))
    fam = ContourFamily([Circle(s, r, nodes=nodes) for r in radii], q=q, a=a)
    fam.certify()
    return fam


def integrate_product(f, family, nodes=None, chunk=200_000):
    """Nested tensor-product quadrature of (1/2pi i)^k oint...oint f dz_1..dz_k.

    f must be vectorized: called with k arrays of common shape. Guarded to
    k <= 4 axes. Each variable lives on its own contour from the family.
    """
    k = len(family)
    if k > 4:
        raise ValueError("integrate_product guarded to k <= 4 axes")
    axes = [c.sample(nodes=nodes) for c in family.contours]
    zs = [ax[0] for ax in axes]
    ws = [ax[1] for ax in axes]
    sizes = [len(z) for z in zs]
    total = int(np.prod(sizes))
    out = 0.0 + 0.0j
    # chunk over the flattened grid to bound memory
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        coords = np.unravel_index(idx, sizes)
        zargs = [zs[d][coords[d]] for d in range(k)]
        wprod = ws[0][coords[0]].copy()
        for d in range(1, k):
            wprod *= ws[d][coords[d]]
        out += np.sum(f(*zargs) * wprod)
    return out


def integrate_halfline(f, decay_rate=1.0, order=64, check=True):
    """int_0^inf f(x) dx by Gauss-Laguerre against e^{-decay_rate x}.

    f must satisfy |f(x)| <= poly(x) e^{-decay_rate x}; divergence is flagged
    by order-doubling disagreement.
    """
    if decay_rate <= 0:
        raise ValueError("decay rate must be positive")

    def _eval(m):
        x, w = np.polynomial.laguerre.laggauss(m)
        # scaled weights w_i e^{x_i} computed in log space to dodge overflow
        sw = np.exp(np.log(w) + x)
        y = x / decay_rate
        return np.sum(sw * np.asarray(f(y))) / decay_rate

    v1 = _eval(order)
    if not check:
        return v1
    v2 = _eval(2 * order)
    if abs(v2 - v1) > 1e-8 * max(1.0, abs(v2)):
        raise QuadratureError(
            "half-line quadrature did not stabilize (%.6e vs %.6e); "
            "integrand may decay slower than e^{-%g x}" % (v1, v2, decay_rate))
    return v2
