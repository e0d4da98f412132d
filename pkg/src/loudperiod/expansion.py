"""Asymptotic expansion of the Dulac time T(s; nu) at the outer boundary.

The variable s here is always the physical offset from the anchor: the orbit
starts at (1 - s, 0) on Gamma1 and Gamma3 and at (p1 - s, 0) on Gamma2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import specfun as sf
from .core import Chart, _as_param, hyperbola_params, in_W
from .errors import DomainError, PoleError, UnsupportedCaseError

__all__ = [
    "ExpansionTerm",
    "ExpansionModel",
    "CoeffSet",
    "gamma1_coeffs",
    "gamma1_resonance_coeffs",
    "gamma2_coeffs",
    "gamma2_resonance_coeffs",
    "gamma3_coeffs",
    "build_model",
    "eval_model",
    "richardson_limit",
    "t101_half_limit",
    "t10_limit_at_F1",
]

SQRT_PI = math.sqrt(math.pi)

POLE = "pole"
UNSPECIFIED = "no closed form"
ISOCHRONE = "isochrone"
OVERFLOW = "overflow"

_COEFF_NAMES = (
    "T00", "T01", "T10", "T20",
    "T201_2", "T200_2", "T101_1", "T100_1", "T101_half", "T100_half",
    "T0", "T1", "T2",
)


@dataclass(frozen=True)
class ExpansionTerm:
    """coeff * s^exponent * omega(s; comp_alpha)^comp_power.

    ``coeff`` is None when no closed form is available; ``name`` says which
    coefficient the term carries.
    """

    exponent: float
    comp_power: int = 0
    comp_alpha: float = 0.0
    coeff: float | None = 0.0
    name: str = ""

    def __post_init__(self):
        if self.exponent < 0:
            raise DomainError(f"term exponent must be >= 0, got {self.exponent}")
        if self.comp_power not in (0, 1):
            raise DomainError(f"comp_power must be 0 or 1, got {self.comp_power}")

    def basis(self, s: float) -> float:
        v = s**self.exponent
        if self.comp_power:
            v *= sf.compensator(s, self.comp_alpha)
        return v

    def value(self, s: float) -> float:
        if self.coeff is None:
            raise UnsupportedCaseError(f"coefficient {self.name or '?'} has no closed form")
        return self.coeff * self.basis(s)


@dataclass(frozen=True)
class ExpansionModel:
    terms: tuple
    L: float
    chart: Chart | None
    case_label: str
    reasons: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return all(t.coeff is not None for t in self.terms)

    def missing(self) -> list[str]:
        return [t.name for t in self.terms if t.coeff is None]


@dataclass
class CoeffSet:
    """Expansion coefficients; absent entries are None with a reason in ``reasons``."""

    T00: float | None = None
    T01: float | None = None
    T10: float | None = None
    T20: float | None = None
    T201_2: float | None = None
    T200_2: float | None = None
    T101_1: float | None = None
    T100_1: float | None = None
    T101_half: float | None = None
    T100_half: float | None = None
    T0: float | None = None
    T1: float | None = None
    T2: float | None = None
    rho: dict = field(default_factory=dict)
    reasons: dict = field(default_factory=dict)
    lam: float | None = None

    def present(self) -> dict:
        return {k: getattr(self, k) for k in _COEFF_NAMES if getattr(self, k) is not None}

    def absent(self) -> dict:
        return dict(self.reasons)

    def _set(self, name: str, fn: Callable[[], float], strict: bool):
        try:
            v = fn()
        except PoleError as exc:
            if strict:
                raise
            self.reasons[name] = f"{POLE}: {exc}"
            return
        except OverflowError:
            if strict:
                raise PoleError(f"{name} overflows double precision")
            self.reasons[name] = f"{OVERFLOW}: exceeds double range"
            return
        if not math.isfinite(v):
            if strict:
                raise PoleError(f"{name} is not finite")
            self.reasons[name] = f"{POLE}: non-finite value"
            return
        setattr(self, name, float(v))


# Resonant parameters typed as decimals (F = 2/3, 5/4) put Gamma arguments a
# few ulps away from a pole; within this relative distance they count as the pole.
POLE_SNAP = 1e-9


def _pole_check(x: float) -> None:
    n = round(x)
    if n <= 0 and abs(x - n) <= POLE_SNAP * max(1.0, abs(x)):
        raise PoleError(f"Gamma argument {x!r} sits on the pole {n}")


def _pgamma(x: float) -> float:
    """Gamma with poles widened to the snapping distance."""
    _pole_check(x)
    return sf.gamma(x)


# -- Gamma1 -----------------------------------------------------------------


def _check_V(D, F):
    if not (-1.0 < D < 0.0 and 0.0 < F < 1.0):
        raise DomainError(f"Gamma1 coefficients need nu in V (-1<D<0, 0<F<1); got D={D}, F={F}")


def _g1_lambda(F):
    return F / (1.0 - F)


def _g1_rho1(D, F):
    lam = _g1_lambda(F)
    base = D / (F - 1.0)
    if not base > 0:
        raise DomainError(f"D/(F-1) must be positive, got {base}")
    return SQRT_PI / (2.0 * (1.0 - F)) * (F / (D + 1.0)) ** ((lam + 1) / 2) * base ** (lam / 2)


def _g1_rho2(D, F):
    return SQRT_PI / (2.0 * math.sqrt(F * (D + 1.0) ** 3))


def _g1_T01(D, F):
    lam = _g1_lambda(F)
    return _g1_rho1(D, F) * _pgamma(-lam / 2) * sf.rgamma((1 - lam) / 2)


def _g1_T10(D, F):
    lam = _g1_lambda(F)
    u = 1.0 / (2.0 * lam)
    return _g1_rho2(D, F) * (2 * D + 1) * _pgamma(1 - u) * sf.rgamma(1.5 - u)


def _g1_T20_half(F):
    # T20 on the line D = -1/2
    lam = _g1_lambda(F)
    return math.sqrt(math.pi / (2 * F)) * _pgamma(0.5 - 1 / lam) * sf.rgamma(1 - 1 / lam)


def _g1_rho4(D, F):
    lam = _g1_lambda(F)
    # (lam-1) Gamma((1-lam)/2) = -2 Gamma((3-lam)/2) keeps this finite at lam = 1
    return -2.0 * _g1_rho1(D, F) * sf.gamma(-lam / 2) * sf.rgamma((3 - lam) / 2) / (F - 1.0) ** 2


def _g1_rho5(D, F):
    lam = _g1_lambda(F)
    u = 1.0 / (2.0 * lam)
    return 2.0 * _g1_rho2(D, F) * sf.gamma(1 - u) * sf.rgamma(1.5 - u)


def gamma1_coeffs(nu, strict: bool = False) -> CoeffSet:
    """T00, T01, T10, T20 on V, with lambda = F/(1-F).

    Coefficients sitting on a pole are left absent (or raise PoleError when
    ``strict``).  T20 has a closed form only on D = -1/2.
    """
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    _check_V(D, F)
    cs = CoeffSet(lam=_g1_lambda(F))
    cs.T00 = math.pi / (2.0 * math.sqrt(F * (D + 1.0)))
    try:
        cs.rho["rho1"] = _g1_rho1(D, F)
    except OverflowError:
        cs.rho["rho1"] = None
    cs.rho["rho2"] = _g1_rho2(D, F)
    cs._set("T01", lambda: _g1_T01(D, F), strict)
    cs._set("T10", lambda: _g1_T10(D, F), strict)
    if D == -0.5:
        cs._set("T20", lambda: _g1_T20_half(F), strict)
    else:
        cs.reasons["T20"] = f"{UNSPECIFIED}: rho3 is only known to be analytic off D=-1/2"
        cs.rho["rho3"] = None
    return cs


def richardson_limit(f: Callable[[float], float], lam0: float, deltas=(1e-3, 5e-4, 2.5e-4)) -> float:
    """Value at lam0 of a function analytic there, from samples at lam0 +- delta.

    Symmetric averages cancel odd powers (including a simple pole);
    two Richardson steps remove the delta^2 and delta^4 terms.
    """
    d1, d2, d3 = deltas
    if not (abs(d1 - 2 * d2) < 1e-15 and abs(d2 - 2 * d3) < 1e-15):
        raise DomainError("deltas must halve successively")
    g = [(f(lam0 + d) + f(lam0 - d)) / 2.0 for d in deltas]
    r1 = [(4 * g[1] - g[0]) / 3, (4 * g[2] - g[1]) / 3]
    return (16 * r1[1] - r1[0]) / 15


def gamma1_resonance_coeffs(nu, which: str) -> CoeffSet:
    """Compensator coefficients of Gamma1 near lambda = 2 (F = 2/3) or lambda = 1 (F = 1/2).

    lambda1: closed forms T101_1 = -rho4 (F-1/2)^2, T100_1 = rho5 (D+1/2) + rho6 (F-1/2).
    lambda2: T201_2 = lim (2-lambda) T01 and T200_2 = lim (T20 + T01), by
    symmetric Richardson extrapolation in lambda at fixed D.
    """
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    _check_V(D, F)
    lam = _g1_lambda(F)
    cs = CoeffSet(lam=lam)
    if which == "lambda1":
        if not 0.75 <= lam <= 1.25:
            raise DomainError(f"lambda1 case needs lambda near 1 (F near 1/2); got lambda={lam}")
        rho4 = _g1_rho4(D, F)
        rho5 = _g1_rho5(D, F)
        rho6 = (1.0 - F) / 2.0 * rho4
        cs.rho.update(rho1=_g1_rho1(D, F), rho2=_g1_rho2(D, F), rho4=rho4, rho5=rho5, rho6=rho6)
        cs.T101_1 = -rho4 * (F - 0.5) ** 2
        cs.T100_1 = rho5 * (D + 0.5) + rho6 * (F - 0.5)
        return cs
    if which != "lambda2":
        raise DomainError(f"unknown resonance {which!r}; expected 'lambda1' or 'lambda2'")
    if not 1.5 <= lam <= 2.5:
        raise DomainError(f"lambda2 case needs lambda near 2 (F near 2/3); got lambda={lam}")
    cs.rho.update(rho1=_g1_rho1(D, F), rho2=_g1_rho2(D, F))

    def F_of(l):
        return l / (1.0 + l)

    def g201(l):
        return (2.0 - l) * _g1_T01(D, F_of(l))

    cs.T201_2 = _limit_or_direct(g201, lam, 2.0)
    if D == -0.5:

        def g200(l):
            return _g1_T20_half(F_of(l)) + _g1_T01(D, F_of(l))

        cs.T200_2 = _limit_or_direct(g200, lam, 2.0)
    else:
        cs.reasons["T200_2"] = f"{UNSPECIFIED}: needs T20, known only on D=-1/2"
    return cs


def _limit_or_direct(g, lam, lam0, near=1e-2):
    if abs(lam - lam0) >= near:
        return g(lam)
    return richardson_limit(g, lam)


# -- Gamma2 -----------------------------------------------------------------


def _g2_parts(D, F):
    geo = hyperbola_params((D, F))
    a, p1, p2, z = geo.a, geo.p1, geo.p2, geo.z
    k1 = p2 - p1
    if not (a > 0 and 1.0 - p1 > 0 and k1 > 0):
        raise DomainError(f"hyperbola geometry out of range at D={D}, F={F}")
    lam = 1.0 / (2.0 * (F - 1.0))
    sa = math.sqrt(2.0 * a)
    # in logs: both powers leave double range as F -> 1+
    lr = lam * math.log(k1) - F / (F - 1.0) * math.log(1.0 - p1) - math.log(2.0 * sa * (F - 1.0))
    rho1 = math.exp(lr) if lr < 709.0 else math.inf
    rho2 = 1.0 / (2.0 * sa * k1 * (1.0 - p1))
    rho3 = 3.0 / (8.0 * sa * k1 * k1 * (1.0 - p1))
    rho4 = (p1 - 1.0 + 2.0 * F * k1) / (k1 * (p1 - 1.0))
    return geo, lam, dict(rho1=rho1, rho2=rho2, rho3=rho3, rho4=rho4)


def _g2_T00(geo):
    z = geo.z
    # 2F1(1, 1/2; 3/2; z) = artanh(sqrt z)/sqrt z, written through the series helper
    h = sf.hyp2f1(1.0, 0.5, 1.5, z)
    return math.sqrt(2.0) / (math.sqrt(geo.a) * (1.0 - geo.p1)) * h


def _g2_T01(lam, rho):
    return rho["rho1"] * _pgamma(-lam) * SQRT_PI * sf.rgamma(0.5 - lam)


def _g2_T10(lam, rho, z):
    il = 1.0 / lam
    _pole_check(1.0 - il)
    return rho["rho2"] * sf.beta_hyp2f1(1.0 - il, -0.5, -1.0 - il, z)


def _g2_T20(lam, rho, z):
    il = 1.0 / lam
    t10 = _g2_T10(lam, rho, z)
    _pole_check(1.0 - 2 * il)
    return rho["rho3"] * sf.beta_hyp2f1(1.0 - 2 * il, -1.5, -2 * il - 3.0, z) + rho["rho4"] * t10


def _check_W(D, F):
    if not in_W((D, F)):
        raise DomainError(f"Gamma2 coefficients need nu in W (F>1, D<0, F+D>0); got D={D}, F={F}")


def gamma2_coeffs(nu, strict: bool = False) -> CoeffSet:
    """T00, T01, T10, T20 on W, with lambda = 1/(2(F-1)) and z = (1-p2)/(1-p1)."""
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    _check_W(D, F)
    geo, lam, rho = _g2_parts(D, F)
    cs = CoeffSet(lam=lam, rho=dict(rho))
    cs.T00 = _g2_T00(geo)
    cs._set("T01", lambda: _g2_T01(lam, rho), strict)
    cs._set("T10", lambda: _g2_T10(lam, rho, geo.z), strict)
    cs._set("T20", lambda: _g2_T20(lam, rho, geo.z), strict)
    return cs


def _g2_along_F(D, fn):
    """Wrap fn(lam, rho, geo) as a function of lambda at fixed D."""

    def g(l):
        F = 1.0 + 1.0 / (2.0 * l)
        geo, lam, rho = _g2_parts(D, F)
        return fn(lam, rho, geo)

    return g


def gamma2_resonance_coeffs(nu, which: str) -> CoeffSet:
    """Compensator coefficients of Gamma2 near lambda = 2 (F = 5/4) or lambda = 1/2 (F = 2).

    lambda2: T201_2 = lim (2-lambda) T01 and T200_2 = lim (T20 + T01).
    lambda_half: T101_half = -lim (1-2 lambda) T10; at F = 2 exactly this is
    (3/4) rho2 2F1(-3, -1/2; -3/2; z).  T100_half involves T02, which has
    no closed form, and is reported absent.
    """
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    _check_W(D, F)
    geo, lam, rho = _g2_parts(D, F)
    cs = CoeffSet(lam=lam, rho=dict(rho))
    if which == "lambda2":
        if not 1.5 <= lam <= 2.5:
            raise DomainError(f"lambda2 case needs lambda near 2 (F near 5/4); got lambda={lam}")
        g201 = _g2_along_F(D, lambda l, r, gm: (2.0 - l) * _g2_T01(l, r))
        g200 = _g2_along_F(D, lambda l, r, gm: _g2_T20(l, r, gm.z) + _g2_T01(l, r))
        cs.T201_2 = _limit_or_direct(g201, lam, 2.0)
        cs.T200_2 = _limit_or_direct(g200, lam, 2.0)
        return cs
    if which != "lambda_half":
        raise DomainError(f"unknown resonance {which!r}; expected 'lambda2' or 'lambda_half'")
    if not 0.375 <= lam <= 0.625:
        raise DomainError(f"lambda_half case needs lambda near 1/2 (F near 2); got lambda={lam}")
    if F == 2.0:
        cs.T101_half = 0.75 * rho["rho2"] * sf.hyp2f1(-3.0, -0.5, -1.5, geo.z)
    else:
        g = _g2_along_F(D, lambda l, r, gm: -(1.0 - 2.0 * l) * _g2_T10(l, r, gm.z))
        cs.T101_half = _limit_or_direct(g, lam, 0.5)
    cs.reasons["T100_half"] = f"{UNSPECIFIED}: equals lim (T10 + T02) and T02 has no closed form"
    return cs


def t101_half_limit(D: float) -> float:
    """T101_half(D, 2) through the extrapolated limit path only."""
    g = _g2_along_F(D, lambda l, r, gm: -(1.0 - 2.0 * l) * _g2_T10(l, r, gm.z))
    return richardson_limit(g, 0.5)


# -- Gamma3 -----------------------------------------------------------------


def t10_limit_at_F1(D: float, eps=(1e-2, 5e-3, 2.5e-3)) -> float:
    """F -> 1^- limit of the Gamma1 coefficient T10 by one-sided Richardson in 1 - F.

    Compare with the Gamma3 coefficient T1 = (2D+1)/(1+D)^(3/2).
    """
    e0, e1, e2 = eps
    if not (e1 == e0 / 2 and e2 == e1 / 2):
        raise DomainError("eps must halve successively")
    f = [gamma1_coeffs((D, 1.0 - e)).T10 for e in eps]
    r = [2 * f[1] - f[0], 2 * f[2] - f[1]]
    return (4 * r[1] - r[0]) / 3


def gamma3_coeffs(D: float) -> CoeffSet:
    """Saddle-node chart F = 1: T0 = pi/(2 sqrt(1+D)), T1 = (2D+1)/(1+D)^(3/2), T2 at D = -1/2."""
    D = float(D)
    if not -1.0 < D < 0.0:
        raise DomainError(f"Gamma3 coefficients need D in (-1, 0); got D={D}")
    cs = CoeffSet()
    # T0 is the F -> 1 limit of the Gamma1 constant term
    cs.T0 = math.pi / (2.0 * math.sqrt(1.0 + D))
    cs.T1 = (2.0 * D + 1.0) / (1.0 + D) ** 1.5
    if D == -0.5:
        cs.T2 = math.pi / math.sqrt(2.0)
    else:
        cs.reasons["T2"] = f"{UNSPECIFIED}: only the value on D=-1/2 is known"
    return cs


# -- models -----------------------------------------------------------------

_EPS = 1e-12


def _term(cs: CoeffSet, name: str, exponent, comp_power=0, comp_alpha=0.0, zero=False):
    v = 0.0 if zero else getattr(cs, name)
    return ExpansionTerm(exponent, comp_power, comp_alpha, v, name)


def build_model(nu) -> ExpansionModel:
    """Assemble the expansion case for nu; terms are listed from dominant to smallest."""
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    iso = (D, F) in ((-0.5, 2.0), (-0.5, 0.5))
    if -1.0 < D < 0.0 and 0.0 < F < 1.0:
        lam = _g1_lambda(F)
        if abs(F - 2.0 / 3.0) < _EPS:
            cs = gamma1_coeffs(nu)
            rc = gamma1_resonance_coeffs(nu, "lambda2")
            cs.T201_2, cs.T200_2 = rc.T201_2, rc.T200_2
            cs.reasons.update(rc.reasons)
            terms = (
                _term(cs, "T00", 0),
                _term(cs, "T10", 1),
                _term(cs, "T201_2", 2, 1, 2.0 - lam),
                _term(cs, "T200_2", 2),
            )
            return ExpansionModel(terms, 3.0, Chart.Gamma1, "G1c", cs.reasons)
        if abs(F - 0.5) < _EPS:
            cs = gamma1_coeffs(nu)
            rc = gamma1_resonance_coeffs(nu, "lambda1")
            cs.T101_1, cs.T100_1 = rc.T101_1, rc.T100_1
            terms = (
                _term(cs, "T00", 0),
                _term(cs, "T101_1", 1, 1, 1.0 - lam),
                _term(cs, "T100_1", 1),
            )
            return ExpansionModel(terms, 2.0, Chart.Gamma1, "G1d", cs.reasons)
        cs = gamma1_coeffs(nu)
        if 2.0 / 3.0 < F:
            terms = (_term(cs, "T00", 0), _term(cs, "T10", 1), _term(cs, "T20", 2))
            return ExpansionModel(terms, min(3.0, lam), Chart.Gamma1, "G1a", cs.reasons)
        if 0.5 < F:
            terms = (_term(cs, "T00", 0), _term(cs, "T10", 1), _term(cs, "T01", lam))
            return ExpansionModel(terms, 2.0, Chart.Gamma1, "G1b", cs.reasons)
        raise UnsupportedCaseError(f"no expansion case for F={F} <= 1/2 on Gamma1")
    if -1.0 < D < 0.0 and F == 1.0:
        cs = gamma3_coeffs(D)
        terms = (_term(cs, "T0", 0), _term(cs, "T1", 1), _term(cs, "T2", 2))
        return ExpansionModel(terms, 2.0, None, "G3", cs.reasons)
    if in_W(nu):
        lam = 1.0 / (2.0 * (F - 1.0))
        cs = gamma2_coeffs(nu)
        if abs(F - 1.25) < _EPS:
            rc = gamma2_resonance_coeffs(nu, "lambda2")
            cs.T201_2, cs.T200_2 = rc.T201_2, rc.T200_2
            terms = (
                _term(cs, "T00", 0),
                _term(cs, "T10", 1),
                _term(cs, "T201_2", 2, 1, 2.0 - lam),
                _term(cs, "T200_2", 2),
            )
            return ExpansionModel(terms, 3.0, Chart.Gamma2, "G2c", cs.reasons)
        if abs(F - 2.0) < _EPS:
            rc = gamma2_resonance_coeffs(nu, "lambda_half")
            cs.T101_half = rc.T101_half
            reasons = dict(cs.reasons)
            reasons.pop("T10", None)
            reasons.pop("T20", None)
            if iso:
                # the period is constant, so every non-constant coefficient vanishes
                cs.T100_half = 0.0
                reasons["T100_half"] = ISOCHRONE
            else:
                reasons.update(rc.reasons)
            terms = (
                _term(cs, "T00", 0),
                _term(cs, "T01", lam),
                _term(cs, "T101_half", 1, 1, 1.0 - 2.0 * lam),
                _term(cs, "T100_half", 1),
            )
            return ExpansionModel(terms, 1.5, Chart.Gamma2, "G2d", reasons)
        if 1.0 < F < 1.25:
            terms = (_term(cs, "T00", 0), _term(cs, "T10", 1), _term(cs, "T20", 2))
            return ExpansionModel(terms, min(3.0, lam), Chart.Gamma2, "G2a", cs.reasons)
        if 1.25 < F < 1.5:
            terms = (
                _term(cs, "T00", 0),
                _term(cs, "T10", 1),
                _term(cs, "T01", lam),
                _term(cs, "T20", 2),
            )
            return ExpansionModel(terms, lam + 1.0, Chart.Gamma2, "G2b", cs.reasons)
        raise UnsupportedCaseError(f"no expansion case for F={F} on Gamma2")
    raise UnsupportedCaseError(f"nu=(D={D}, F={F}) is not on a chart with an expansion")


def eval_model(model: ExpansionModel, s_phys: float) -> float:
    """Sum of the model terms at the physical offset s_phys > 0."""
    s = float(s_phys)
    if not s > 0:
        raise DomainError(f"s_phys must be positive, got {s}")
    return math.fsum(t.value(s) for t in model.terms)
