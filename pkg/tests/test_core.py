import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from loudperiod.core import (
    ISOCHRONES,
    Chart,
    Parameter,
    RegionTag,
    annulus_anchor,
    classify_region,
    hyperbola_params,
    hyperbolicity_ratio,
    quadratic_coeffs,
)
from loudperiod.errors import DomainError


def exact_quadratic(D, F):
    D, F = Fraction(D), Fraction(F)
    a = D / (2 * (1 - F))
    b = (D - F + 1) / ((1 - F) * (1 - 2 * F))
    c = (F - D - 1) / (2 * F * (1 - F) * (1 - 2 * F))
    return a, b, c


@pytest.mark.parametrize("nu,tag", [
    ((-0.5, 0.75), RegionTag.V_gamma1),
    ((-0.5, 2.0), RegionTag.Isochrone),
    ((-1.2, 1.33), RegionTag.W_gamma2),
    ((-0.5, 1.0), RegionTag.F_equals_1),
    ((0.5, 3.0), RegionTag.Other),
    ((-0.5, 0.5), RegionTag.Isochrone),
    ((0.0, 0.25), RegionTag.Isochrone),
    ((0.0, 1.0), RegionTag.Isochrone),
])
def test_classify_examples(nu, tag):
    assert classify_region(nu) is tag


def test_isochrone_exact_unless_tolerance():
    near = (-0.5 + 1e-12, 2.0)
    assert classify_region(near) is RegionTag.W_gamma2
    assert classify_region(near, tol=1e-9) is RegionTag.Isochrone


def test_parameter_rejects_nonfinite():
    with pytest.raises(DomainError):
        Parameter(float("nan"), 1.0)
    with pytest.raises(DomainError):
        Parameter(0.0, float("inf"))


def test_hyperbola_isochrone():
    g = hyperbola_params((-0.5, 2.0))
    assert (g.a, g.b, g.c) == pytest.approx((0.25, -0.5, 0.125), rel=1e-15)
    assert g.p1 == pytest.approx(1 - math.sqrt(2) / 2, rel=1e-14)
    assert g.p2 == pytest.approx(1 + math.sqrt(2) / 2, rel=1e-14)
    assert g.z == pytest.approx(-1.0, rel=1e-14)
    assert g.lam == 0.5


def test_hyperbola_against_exact_rational():
    a, b, c = exact_quadratic(Fraction(-6, 5), Fraction(4, 3))
    # the exact quadratic at (-6/5, 4/3) is 1.8 x^2 - 2.76 x + 1.035
    assert (a, b, c) == (Fraction(9, 5), Fraction(-69, 25), Fraction(207, 200))
    g = hyperbola_params((-1.2, 4.0 / 3.0))
    disc = b * b - 4 * a * c
    for p in (g.p1, g.p2):
        r = Fraction(p)
        assert abs(float(a * r * r + b * r + c)) < 1e-15
    ref1 = (-float(b) - math.sqrt(float(disc))) / (2 * float(a))
    assert g.p1 == pytest.approx(ref1, rel=1e-14)
    assert g.lam == pytest.approx(1.5)


def test_hyperbola_outside_W():
    with pytest.raises(DomainError):
        hyperbola_params((-0.5, 0.8))


@pytest.mark.parametrize("nu,chart,val", [
    ((-0.5, 2.0), Chart.Gamma2, 0.5),
    ((-0.5, 2.0 / 3.0), Chart.Gamma1, 2.0),
    ((-1.2, 4.0 / 3.0), Chart.Gamma2, 1.5),
])
def test_ratio_examples(nu, chart, val):
    assert hyperbolicity_ratio(nu, chart) == pytest.approx(val, rel=1e-14)


def test_ratio_poles():
    with pytest.raises(DomainError):
        hyperbolicity_ratio((-0.5, 1.0), Chart.Gamma1)
    with pytest.raises(DomainError):
        hyperbolicity_ratio((-0.5, 0.9), Chart.Gamma2)


def test_anchor_examples():
    assert annulus_anchor((-0.5, 0.75)) == 1.0
    assert annulus_anchor((-0.5, 2.0)) == pytest.approx(1 - math.sqrt(2) / 2, rel=1e-14)
    assert annulus_anchor((-0.5, 1.0)) == 1.0
    assert annulus_anchor((0.0, 1.0)) == 0.5
    with pytest.raises(DomainError):
        annulus_anchor((0.5, 3.0))


def test_anchor_on_D0_edge_is_the_linear_root():
    a, b, c = quadratic_coeffs((0.0, 3.0))
    assert a == 0.0
    assert annulus_anchor((0.0, 3.0)) == pytest.approx(1 / 6, rel=1e-15)


def test_isochrone_list():
    assert set(ISOCHRONES) == {(0.0, 1.0), (-0.5, 2.0), (-0.5, 0.5), (0.0, 0.25)}


W_points = st.tuples(st.floats(-3.0, -1e-3), st.floats(1.0 + 1e-3, 4.0)).filter(lambda p: p[0] + p[1] > 1e-3)


@settings(max_examples=1000, deadline=None)
@given(W_points)
def test_W_geometry(nu):
    g = hyperbola_params(nu)
    assert g.p1 < g.p2
    assert g.z < 1.0
    xi = annulus_anchor(nu)
    scale = abs(g.a) * xi * xi + abs(g.b) * xi + abs(g.c)
    assert abs(g.a * xi * xi + g.b * xi + g.c) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(st.floats(-2.0, -1e-3), st.floats(1.0 + 1e-6, 10.0), st.floats(1e-6, 5.0))
def test_ratio_decreasing_in_F(D, F, dF):
    assert hyperbolicity_ratio((D, F + dF), Chart.Gamma2) < hyperbolicity_ratio((D, F), Chart.Gamma2)


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_classify_total_and_deterministic(D, F):
    t = classify_region((D, F))
    assert isinstance(t, RegionTag)
    assert classify_region((D, F)) is t
