import json
import math

import numpy as np
import pytest

from qwgrowth.contours import (Circle, ContourFamily, InfeasibleGeometry,
                               QuadratureError, SineArc, build_nested_circles,
                               integrate_closed, integrate_halfline,
                               integrate_product)


def test_residue_of_inverse():
    val = integrate_closed(lambda z: 1.0 / z, Circle(0.0, 1.0))
    assert val == pytest.approx(1.0, abs=1e-13)


def test_residue_exp_over_cube():
    # e^{2z}/z^3 -> 2^2/2! = 2
    val = integrate_closed(lambda z: np.exp(2 * z) / z ** 3, Circle(0.0, 0.7))
    assert val == pytest.approx(2.0, abs=1e-12)


def test_entire_function_integrates_to_zero():
    val = integrate_closed(lambda z: np.exp(z) + z ** 5, Circle(0.3, 1.1))
    assert abs(val) < 1e-12


def test_node_doubling_convergence():
    f = lambda z: np.exp(z) / (z - 0.2)
    c128 = Circle(0.0, 1.0, nodes=128)
    c256 = Circle(0.0, 1.0, nodes=256)
    v1 = np.sum(f(c128.sample()[0]) * c128.sample()[1])
    v2 = np.sum(f(c256.sample()[0]) * c256.sample()[1])
    assert abs(v1 - v2) < 1e-10


def test_nonfinite_integrand_rejected():
    with pytest.raises(QuadratureError):
        integrate_closed(lambda z: np.full_like(z, np.nan), Circle(0.0, 1.0))


def test_product_separable_matches_factored():
    fam = ContourFamily([Circle(0.0, 1.0, nodes=64), Circle(0.0, 0.5, nodes=64)],
                        check_origin=False)
    f1 = lambda z: np.exp(z) / z
    f2 = lambda z: np.exp(2 * z) / z
    prod = integrate_product(lambda z, w: f1(z) * f2(w), fam, nodes=64)
    a = integrate_closed(f1, Circle(0.0, 1.0, nodes=64))
    b = integrate_closed(f2, Circle(0.0, 0.5, nodes=64))
    assert prod == pytest.approx(a * b, rel=1e-12)


def test_product_dimension_guard():
    fam = ContourFamily([Circle(0.0, 1.0)] * 5, check_origin=False)
    with pytest.raises(ValueError):
        integrate_product(lambda *z: z[0], fam)


def test_nested_circles_example_radii():
    fam = build_nested_circles(0.5, (1.0, 1.0), 2, 0.1)
    radii = [c.radius for c in fam.contours]
    assert radii[0] == pytest.approx(0.6, abs=1e-12)
    assert radii[1] == pytest.approx(0.1, abs=1e-12)
    assert fam.certify()
    blob = json.loads(fam.to_json())
    assert blob["q"] == 0.5 and len(blob["contours"]) == 2


def test_nested_circles_single_level():
    fam = build_nested_circles(0.5, (0.9, 1.1), 1, 0.3)
    assert len(fam) == 1
    assert fam.certify()


def test_nested_circles_q_near_one_feasible():
    for q in (0.9, 0.99):
        fam = build_nested_circles(q, (1.0,), 3, 0.05, margin=0.002)
        assert fam.certify()


def test_nested_circles_infeasible_reported():
    with pytest.raises(InfeasibleGeometry):
        build_nested_circles(0.5, (1.0,), 6, 0.4)  # outermost swallows 0


def test_halfline_gamma_integrals():
    assert integrate_halfline(lambda x: np.exp(-x)) == pytest.approx(1.0, rel=1e-12)
    val = integrate_halfline(lambda x: x ** 4 * np.exp(-x))
    assert val == pytest.approx(24.0, rel=1e-10)


def test_halfline_moment_expansion_zero():
    # int (2-y) y e^{-y} dy = 2*1! - 2! = 0
    val = integrate_halfline(lambda y: (2.0 - y) * y * np.exp(-y))
    assert abs(val) < 1e-10


def test_halfline_divergence_flagged():
    with pytest.raises(QuadratureError):
        integrate_halfline(lambda x: np.exp(0.5 * x), decay_rate=1.0, order=16)


def test_sine_arc_measure_identity():
    # dW / sqrt((W - top)(W - bottom)) == i dtheta on the chord
    arc = SineArc(0.4, 0.9)
    z, w = arc.sample(nodes=64)
    top, bottom = 0.4 + 0.9j, 0.4 - 0.9j
    measure = 2j * math.pi * w / np.sqrt((z - top) * (z - bottom) * np.exp(0j))
    # integral of i dtheta over [-pi/2, pi/2] is i*pi
    assert np.sum(measure) == pytest.approx(1j * math.pi, abs=1e-10)


def test_deformation_invariance():
    f = lambda z: np.exp(-z) / ((z - 1.0) * (z - 1.2))
    v1 = integrate_closed(f, Circle(1.1, 0.5, nodes=256))
    v2 = integrate_closed(f, Circle(1.05, 0.8, nodes=256))
    assert v1 == pytest.approx(v2, abs=1e-8)
