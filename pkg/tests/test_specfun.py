import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from loudperiod import specfun as sf
from loudperiod.errors import DomainError, PoleError

EULER = 0.5772156649015329


def test_gamma_examples():
    assert sf.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert sf.gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)
    assert sf.gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    for n in (0, -1, -7):
        with pytest.raises(PoleError):
            sf.gamma(float(n))


def test_gamma_against_mpmath():
    rng = np.random.default_rng(1)
    for x in rng.uniform(-20, 20, 400):
        if abs(x - round(x)) < 1e-3:
            continue
        ref = float(mp.gamma(x))
        assert sf.gamma(float(x)) == pytest.approx(ref, rel=1e-13)


def test_rgamma_zero_at_poles():
    assert sf.rgamma(0.0) == 0.0
    assert sf.rgamma(-3.0) == 0.0
    assert sf.rgamma(2.5) == pytest.approx(1 / sf.gamma(2.5), rel=1e-15)


def quad_digamma(z):
    """-gamma + int_0^1 (1 - x^(z-1))/(1 - x) dx at 40 digits."""
    with mp.workdps(40):
        z = mp.mpf(z)
        if z < 1:
            # x = t^(1/z) removes the x^(z-1) endpoint singularity
            g = lambda t: (t ** (1 / z - 1) - 1) / (z * (1 - t ** (1 / z)))
        else:
            g = lambda x: (1 - x ** (z - 1)) / (1 - x)
        return float(-mp.euler + mp.quad(g, [0, 0.5, 1]))


def test_digamma_examples():
    assert sf.digamma(1.0) == pytest.approx(-EULER, rel=1e-14)
    assert sf.digamma(2.0) == pytest.approx(1 - EULER, rel=1e-14)
    assert sf.digamma(2.0) == pytest.approx(quad_digamma(2.0), abs=1e-10)
    with pytest.raises(PoleError):
        sf.digamma(0.0)


@pytest.mark.parametrize("z", [0.1, 0.37, 1.5, 3.3, 7.25, 9.9])
def test_digamma_against_integral(z):
    assert sf.digamma(z) == pytest.approx(quad_digamma(z), abs=1e-10)


def test_beta_examples():
    assert sf.beta(1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert sf.beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)
    with mp.workdps(30):
        ref = float(mp.quad(lambda t: t ** mp.mpf(-0.5) * (1 - t) ** mp.mpf(-0.5), [0, 0.5, 1]))
    assert sf.beta(0.5, 0.5) == pytest.approx(ref, rel=1e-12)
    b = sf.beta(-1 / 3, -1.5)
    assert round(b, 1) == -2.6
    assert b == pytest.approx(float(mp.beta(mp.mpf(-1) / 3, -1.5)), rel=1e-13)


def test_beta_zero_and_poles():
    assert sf.beta(-0.5, -0.5) == 0.0
    with pytest.raises(PoleError):
        sf.beta(-1.0, 0.5)


def test_hyp2f1_examples():
    assert sf.hyp2f1(0.3, -0.7, 1.9, 0.0) == 1.0
    assert sf.hyp2f1(-3, -0.5, -1.5, 0.5) == pytest.approx(0.375, rel=1e-14)
    assert abs(sf.hyp2f1(-3, -0.5, -1.5, -1.0)) < 1e-14
    with pytest.raises(DomainError):
        sf.hyp2f1(0.5, 0.5, 1.5, 1.0)
    with pytest.raises(PoleError):
        sf.hyp2f1(0.5, 0.5, -2.0, 0.3)


@pytest.mark.parametrize("a,b,c", [(0.3, 0.7, 1.9), (-1.3, 0.5, 0.25), (2.2, -0.4, 3.1), (0.5, 1.5, 2.5)])
@pytest.mark.parametrize("z", [-7.0, -0.9, -0.3, 0.2, 0.49, 0.7, 0.95])
def test_hyp2f1_against_mpmath(a, b, c, z):
    ref = float(mp.hyp2f1(a, b, c, z))
    assert sf.hyp2f1(a, b, c, z) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_hyp2f1_pfaff_overlap():
    # at z = -1/2 both the direct series and the Pfaff path are valid
    a, b, c = 0.7, -1.3, 2.1
    z = -0.5
    direct = sf._hyp2f1_series(a, b, c, z)
    pfaff = (1 - z) ** -a * sf._hyp2f1_series(a, c - b, c, z / (z - 1))
    assert direct == pytest.approx(pfaff, rel=1e-12)


def test_hyp2f1_regularized_at_pole():
    # at c = -1 the limit of 2F1/Gamma(c) is (a)_2 (b)_2 z^2/2 2F1(a+2, b+2; 3; z)
    a, b, z = 0.5, 1.5, 0.3
    ref = float(mp.rf(a, 2) * mp.rf(b, 2) * z**2 / 2 * mp.hyp2f1(a + 2, b + 2, 3, z))
    assert sf.hyp2f1_regularized(0.5, 1.5, -1.0, 0.3) == pytest.approx(ref, rel=1e-10)


def test_compensator_examples():
    assert sf.compensator(1.0, 0.3) == 0.0
    assert sf.compensator(0.5, 0.0) == pytest.approx(math.log(2), rel=1e-15)
    assert sf.compensator(0.5, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert sf.compensator(sf.CompensatorArg(0.5, 1.0)) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        sf.compensator(0.0, 0.5)


@pytest.mark.parametrize("alpha", [1e-9, -1e-9, 5e-9, 1e-12])
def test_compensator_small_alpha(alpha):
    for s in (1e-6, 0.01, 0.5):
        ls = math.log(s)
        assert abs(sf.compensator(s, alpha) + ls) <= 1.0 * abs(alpha) * ls * ls


def test_mellin_examples():
    # f_hat = 1/(0 - alpha) = 1 for f = 1 and alpha = -1
    one = sf.MellinInput(lambda s: 1.0, [1.0], -1.0, 0.5)
    assert sf.mellin_hat(one) == pytest.approx(1.0, rel=1e-12)
    x = 0.5
    assert x * 0.0 - (-1.0) * sf.mellin_hat(one) == pytest.approx(1.0)
    lin = sf.MellinInput(lambda s: s, [0.0, 1.0], -1.0, 0.7)
    assert sf.mellin_hat(lin) == pytest.approx(0.35, rel=1e-12)
    with pytest.raises(DomainError):
        sf.mellin_hat(sf.MellinInput(lambda s: 1.0, [1.0], 2.0, 0.5))
    with pytest.raises(DomainError):
        sf.mellin_hat(sf.MellinInput(lambda s: math.exp(s), [1.0], 1.5, 0.5))


def test_mellin_large_x_limit():
    h = lambda y: 1.0 / (1.0 + 2.0 * y * y)
    x = 1e6
    val = x**0.5 * sf.mellin_hat(sf.MellinInput(h, [], -0.5, x))
    ref = 2**-0.25 / 2 * sf.beta(0.25, 0.75)
    # the neglected tail is about x^(-3/2)/3
    assert val == pytest.approx(ref, rel=1e-6)


def test_mellin_independent_of_k():
    f = lambda s: math.exp(0.7 * s)
    tay = [0.7**i / math.factorial(i) for i in range(6)]
    base = sf.mellin_hat(sf.MellinInput(f, tay[:3], 1.4, 0.8))
    for k in (4, 5, 6):
        assert sf.mellin_hat(sf.MellinInput(f, tay[:k], 1.4, 0.8)) == pytest.approx(base, rel=1e-9)


def test_b2f1_examples():
    ref = 2**-0.25 / 2 * sf.beta(0.25, 0.75)
    assert sf.b2f1_limit_a(-0.5, -1.0, 2.0) == pytest.approx(ref, rel=1e-14)
    with mp.workdps(30):
        q = float(mp.quad(lambda u: (1 + 2 * u * u) ** -1 * u ** mp.mpf(-0.5), [0, 1, mp.inf]))
    assert sf.b2f1_limit_a(-0.5, -1.0, 2.0) == pytest.approx(q, rel=1e-10)
    assert sf.b2f1_limit_a(0.5, 0.0, 1.0) == pytest.approx(sf.beta(-0.25, 0.25) / 2, rel=1e-14)
    with pytest.raises(DomainError):
        sf.b2f1_limit_a(2.0, -1.0, 1.0)
    assert sf.b2f1_limit_b(-1.0, 1.0, 0.0, 0.0) == pytest.approx(1.0, rel=1e-15)
    want = sf.beta(-0.5, 1.0) * sf.hyp2f1(-2.0, -0.5, 0.5, 0.3)
    assert sf.b2f1_limit_b(0.5, 1.0, -2.0, 0.3) == pytest.approx(want, rel=1e-14)
    with pytest.raises(DomainError):
        sf.b2f1_limit_b(0.5, 1.0, -2.0, 1.5)


def test_b2f1_b_against_taylor_subtracted_quadrature():
    # B(-1/2,1) 2F1(-2,-1/2;1/2;0.3) = int_0^1 (g(u) - g(0)) u^(-3/2) du - 2 g(0) with g(u) = (1-0.3u)^2
    g = lambda u: (1 - 0.3 * u) ** 2
    with mp.workdps(30):
        q = float(mp.quad(lambda u: (g(u) - 1) * u ** mp.mpf(-1.5), [0, 1])) - 2.0
    assert sf.b2f1_limit_b(0.5, 1.0, -2.0, 0.3) == pytest.approx(q, rel=1e-12)


noninteger = st.floats(-5, 5).filter(lambda x: abs(x - round(x)) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(noninteger)
def test_reflection(x):
    assert sf.gamma(x) * sf.gamma(1 - x) * math.sin(math.pi * x) / math.pi == pytest.approx(1.0, abs=1e-11)


@settings(max_examples=200, deadline=None)
@given(noninteger, noninteger)
def test_beta_symmetry_and_recurrence(z, w):
    assume(abs((z + w) - round(z + w)) > 1e-3 and abs((z + w + 1) - round(z + w + 1)) > 1e-3)
    b = sf.beta(z, w)
    assert sf.beta(w, z) == pytest.approx(b, rel=1e-13)
    assert sf.beta(z + 1, w) == pytest.approx(b * z / (z + w), rel=1e-11, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3))
def test_compensator_decreasing(alpha):
    ss = np.linspace(0.01, 1.0, 40)
    v = [sf.compensator(float(s), alpha) for s in ss]
    assert all(b < a for a, b in zip(v, v[1:]))


poly_st = st.lists(st.floats(-2, 2), min_size=1, max_size=6)
alpha_st = st.floats(-2.5, 3.5).filter(lambda a: abs(a - round(a)) > 0.05)


def _poly_case(poly, alpha):
    f = lambda s: sum(c * s**i for i, c in enumerate(poly))
    k = max(0, math.floor(alpha) + 1)
    return f, (poly + [0.0] * k)[:k]


@settings(max_examples=50, deadline=None)
@given(poly_st, alpha_st, st.floats(0.2, 1.5))
def test_mellin_defining_relation(poly, alpha, x):
    """x d/dx f_hat - alpha f_hat = f by a five-point central difference, f a polynomial."""
    f, tay = _poly_case(poly, alpha)
    fh = lambda t: sf.mellin_hat(sf.MellinInput(f, tay, alpha, t))
    h = 1e-2 * x
    d = (-fh(x + 2 * h) + 8 * fh(x + h) - 8 * fh(x - h) + fh(x - 2 * h)) / (12 * h)
    lhs = x * d - alpha * fh(x)
    assert lhs == pytest.approx(f(x), abs=1e-6 * max(1.0, sum(abs(c) for c in poly)))


@settings(max_examples=100, deadline=None)
@given(poly_st, alpha_st, st.floats(0.05, 3.0))
def test_mellin_polynomial_closed_form(poly, alpha, x):
    """For a polynomial f, f_hat = sum c_i x^i/(i - alpha) exactly."""
    f, tay = _poly_case(poly, alpha)
    exact = sum(c * x**i / (i - alpha) for i, c in enumerate(poly))
    val = sf.mellin_hat(sf.MellinInput(f, tay, alpha, x))
    assert val == pytest.approx(exact, abs=1e-8 * max(1.0, sum(abs(c) * max(1.0, x) ** i for i, c in enumerate(poly))))
