import math

import numpy as np
import pytest
from scipy.optimize import brentq

from loudperiod import specfun as sf
from loudperiod.critical import locate_nu_star
from loudperiod.errors import DomainError, PoleError, UnsupportedCaseError
from loudperiod.expansion import (
    ExpansionModel,
    ExpansionTerm,
    build_model,
    eval_model,
    gamma1_coeffs,
    gamma1_resonance_coeffs,
    gamma2_coeffs,
    gamma2_resonance_coeffs,
    gamma3_coeffs,
    t101_half_limit,
    t10_limit_at_F1,
)
from loudperiod.core import hyperbola_params
from loudperiod.flow import IntegratorConfig, half_period_physical

FINE = IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15)


def test_gamma1_examples():
    assert gamma1_coeffs((-0.5, 0.5)).T00 == pytest.approx(math.pi, rel=1e-15)
    for F in (0.7, 0.8, 0.95):
        assert gamma1_coeffs((-0.5, F)).T10 == 0.0
    ref = math.sqrt(math.pi) / math.sqrt(1.5) * sf.gamma(1 / 6) / sf.gamma(2 / 3)
    t20 = gamma1_coeffs((-0.5, 0.75)).T20
    assert t20 == pytest.approx(ref, rel=1e-14)
    assert round(t20, 3) == 5.949


def test_gamma1_T00_is_limit_of_period():
    nu = (-0.7, 0.4)
    t = [half_period_physical(s, nu, FINE) for s in (1e-3, 5e-4)]
    assert t[-1] == pytest.approx(gamma1_coeffs(nu).T00, rel=1e-2)


def test_gamma1_T20_absent_off_axis():
    c = gamma1_coeffs((-0.3, 0.8))
    assert c.T20 is None and "T20" in c.absent()


def test_gamma1_pole_is_absent_or_strict():
    # lambda = 2 at F = 2/3: T01 has a pole
    c = gamma1_coeffs((-0.4, 2.0 / 3.0))
    assert c.T01 is None and "pole" in c.absent()["T01"]
    with pytest.raises(PoleError):
        gamma1_coeffs((-0.4, 2.0 / 3.0), strict=True)


def test_gamma1_resonance_examples():
    c = gamma1_resonance_coeffs((-0.5, 0.5), "lambda1")
    assert c.rho["rho5"] == pytest.approx(c.rho["rho6"], rel=1e-14)
    assert c.T101_1 == 0.0 and c.T100_1 == 0.0
    c = gamma1_resonance_coeffs((-0.5, 2.0 / 3.0), "lambda2")
    assert c.T201_2 == pytest.approx(-2 * c.rho["rho1"] / sf.gamma(-0.5), rel=1e-8)
    assert c.T201_2 != 0.0
    with pytest.raises(DomainError):
        gamma1_resonance_coeffs((-0.5, 0.9), "lambda1")


def test_gamma2_examples():
    for D in (-1.9, -1.0, -0.5, -0.1):
        assert abs(gamma2_coeffs((D, 2.0)).T01) < 1e-14
    assert abs(gamma2_coeffs((-1.0, 1.25)).T10) < 1e-12
    # at the rounded D = -1.128 T10 is already 2.3e-3; the located point is exact
    c = gamma2_coeffs(locate_nu_star())
    assert abs(c.T10) < 1e-10 and abs(c.T01) < 1e-13
    assert abs(gamma2_coeffs((-1.128, 4.0 / 3.0)).T10) < 3e-3


def test_gamma2_resonance_examples():
    assert abs(gamma2_resonance_coeffs((-0.5, 2.0), "lambda_half").T101_half) < 1e-12
    z = hyperbola_params((-1.0, 2.0)).z
    c = gamma2_resonance_coeffs((-1.0, 2.0), "lambda_half")
    closed = 0.75 * c.rho["rho2"] * sf.hyp2f1(-3, -0.5, -1.5, z)
    assert c.T101_half == pytest.approx(closed, rel=1e-13)
    assert c.T101_half == pytest.approx(t101_half_limit(-1.0), abs=1e-6)
    assert abs(gamma2_resonance_coeffs((-1.0, 1.25), "lambda2").T201_2) > 1e-6
    with pytest.raises(DomainError):
        gamma2_resonance_coeffs((-1.0, 1.7), "lambda2")


def test_gamma3_examples():
    assert gamma3_coeffs(-0.5).T1 == 0.0
    assert gamma3_coeffs(-0.5).T2 == pytest.approx(math.pi / math.sqrt(2), rel=1e-15)
    # D = 0 lies outside the chart; the closed form tends to 1 there
    with pytest.raises(DomainError):
        gamma3_coeffs(0.0)
    assert gamma3_coeffs(-1e-12).T1 == pytest.approx(1.0, abs=1e-10)
    assert gamma3_coeffs(-0.3).T2 is None


def test_gamma3_T2_is_limit_of_gamma1_T20():
    # one-sided: T20(-1/2, 1 - e) is smooth in e, so two Richardson steps in e
    f = [gamma1_coeffs((-0.5, 1.0 - e)).T20 for e in (4e-3, 2e-3, 1e-3)]
    r = [2 * f[1] - f[0], 2 * f[2] - f[1]]
    lim = (4 * r[1] - r[0]) / 3
    assert lim == pytest.approx(gamma3_coeffs(-0.5).T2, rel=1e-5)


def test_gamma3_T1_is_limit_of_gamma1_T10():
    for D in (-0.8, -0.3, -0.05):
        assert t10_limit_at_F1(D) == pytest.approx(gamma3_coeffs(D).T1, abs=1e-4)


@pytest.mark.parametrize("nu,label,names,L", [
    ((-0.5, 0.75), "G1a", ["T00", "T10", "T20"], 3.0),
    ((-0.5, 0.6), "G1b", ["T00", "T10", "T01"], 2.0),
    ((-0.5, 2.0 / 3.0), "G1c", ["T00", "T10", "T201_2", "T200_2"], 3.0),
    ((-0.4, 0.5), "G1d", ["T00", "T101_1", "T100_1"], 2.0),
    ((-0.9, 1.1), "G2a", ["T00", "T10", "T20"], 3.0),
    ((-1.2, 1.4), "G2b", ["T00", "T10", "T01", "T20"], 1.25 + 1),
    ((-1.0, 1.25), "G2c", ["T00", "T10", "T201_2", "T200_2"], 3.0),
    ((-0.6, 2.0), "G2d", ["T00", "T01", "T101_half", "T100_half"], 1.5),
    ((-0.5, 1.0), "G3", ["T0", "T1", "T2"], 2.0),
])
def test_build_model_cases(nu, label, names, L):
    m = build_model(nu)
    assert m.case_label == label
    assert [t.name for t in m.terms] == names
    assert m.L == pytest.approx(L)


def test_G2d_term_shapes():
    m = build_model((-0.6, 2.0))
    t = {x.name: x for x in m.terms}
    assert t["T01"].exponent == pytest.approx(0.5)
    assert t["T101_half"].exponent == 1 and t["T101_half"].comp_power == 1
    assert t["T101_half"].comp_alpha == pytest.approx(0.0)
    assert t["T100_half"].exponent == 1 and t["T100_half"].comp_power == 0


def test_terms_ordered_by_size():
    for nu in [(-0.5, 0.6), (-1.2, 1.4), (-0.6, 2.0), (-1.0, 1.25)]:
        m = build_model(nu)
        s = 1e-8
        sizes = [t.basis(s) for t in m.terms]
        assert all(a > b for a, b in zip(sizes, sizes[1:]))


def test_unsupported_case():
    with pytest.raises(UnsupportedCaseError):
        build_model((-0.6, 1.6))
    with pytest.raises(UnsupportedCaseError):
        build_model((0.5, 3.0))


def test_eval_model_trivial():
    assert eval_model(ExpansionModel((), 0.0, None, "G1a"), 0.3) == 0.0
    m = ExpansionModel((ExpansionTerm(0.0, coeff=2.5),), 0.0, None, "G1a")
    assert eval_model(m, 0.3) == 2.5
    with pytest.raises(DomainError):
        ExpansionTerm(-1.0)


def test_eval_model_isochrone():
    m = build_model((-0.5, 2.0))
    for s in (0.04, 0.01, 0.0025):
        P = 2 * half_period_physical(s, (-0.5, 2.0), FINE)
        assert abs(2 * eval_model(m, s) - P) <= s**1.4


def test_sign_facts():
    for F in np.linspace(0.67, 0.99, 9):
        assert gamma1_coeffs((-0.5, F)).T20 > 0
    for F in np.linspace(0.51, 0.66, 9):
        assert gamma1_coeffs((-0.5, F)).T01 > 0
    assert gamma2_coeffs(locate_nu_star()).T20 < 0


def test_resonant_limit_along_F():
    D = -0.9
    ref = gamma2_resonance_coeffs((D, 1.25), "lambda2").T201_2

    def g(e):
        F = 1.25 + e
        lam = 1 / (2 * (F - 1))
        return (2 - lam) * gamma2_coeffs((D, F)).T01

    vals = [g(e) for e in (1e-3, 1e-4, 1e-5)]
    errs = [abs(v - ref) for v in vals]
    assert errs[0] > errs[1] > errs[2]
    # one-sided linear extrapolation of the converging sequence
    lim = (10 * g(1e-5) - g(1e-4)) / 9
    assert lim == pytest.approx(ref, abs=1e-6)


def test_T10_zero_set_on_F_five_quarters():
    f = lambda D: gamma2_coeffs((D, 1.25)).T10
    Ds = np.linspace(-1.25 + 1e-6, -1e-6, 400)
    v = [f(d) for d in Ds]
    changes = sum(1 for a, b in zip(v, v[1:]) if a * b < 0)
    assert changes == 1
    root = brentq(f, -1.2, -0.8, xtol=1e-14)
    assert abs(root + 1) < 1e-8


RESIDUAL_CASES = [
    ((-0.5, 0.75), 0.04),
    ((-0.5, 0.6), 0.04),
    ((-0.7, 0.55), 0.04),
    ((-0.5, 2.0 / 3.0), 0.04),
    ((-0.4, 0.5), 0.04),
    ((-0.9, 1.1), 0.04),
    ((-1.2, 1.4), 0.01),
]


@pytest.mark.parametrize("nu,s0", RESIDUAL_CASES)
def test_residual_decay(nu, s0):
    m = build_model(nu)
    ratios = []
    for k in range(7):
        s = s0 * 2.0**-k
        r = abs(2 * eval_model(m, s) - 2 * half_period_physical(s, nu, FINE))
        ratios.append(r / s ** (m.L - 0.1))
    assert max(ratios[3:]) <= 1.05 * max(ratios[:3])


def test_residual_G2c_has_log_remainder():
    """At lambda = 2 the remainder carries s^3 log s, so the ratio uses s^3 |log s|."""
    nu = (-1.0, 1.25)
    m = build_model(nu)
    ss = 0.02 * 2.0 ** -np.arange(7)
    r = np.array([half_period_physical(s, nu, FINE) - eval_model(m, s) for s in ss])
    ratio = np.abs(r) / (ss**3 * np.abs(np.log(ss)))
    # A s^3 log s + B s^3 gives a ratio A + B/log s, approached from below with shrinking steps
    steps = np.diff(ratio)
    assert ratio.max() < 100
    assert all(steps > 0) and all(b < a for a, b in zip(steps, steps[1:]))
