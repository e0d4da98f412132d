"""Verification suites shared by the command line and the test-suite.

Each suite returns a list of Check records; a suite passes iff every check does.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import specfun as sf
from .core import ISOCHRONES, Parameter
from .critical import locate_nu_star, solve_G, verify_isochrone
from .errors import LoudError
from .expansion import (
    build_model,
    gamma1_coeffs,
    gamma2_coeffs,
    gamma2_resonance_coeffs,
    gamma3_coeffs,
    t101_half_limit,
    t10_limit_at_F1,
)
from .exactpoly import (
    eval_F_appC,
    eval_Phi,
    eval_rho_appC,
    verify_appC_pipeline,
    verify_bautin_identity,
)
from .flow import IntegratorConfig, half_period_physical

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    suite: str
    stage: str
    verdict: bool
    witness: object
    tolerance: object
    elapsed_ms: float = 0.0
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "stage": self.stage,
            "verdict": "pass" if self.verdict else "fail",
            "witness": _plain(self.witness),
            "tolerance": _plain(self.tolerance),
            "elapsed_ms": round(float(self.elapsed_ms), 3),
            "detail": {k: _plain(v) for k, v in self.detail.items()},
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, Parameter):
        return [v.D, v.F]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _check(suite, stage, fn):
    """Run fn() -> (verdict, witness, tolerance, detail) under a timer."""
    t0 = time.perf_counter()
    try:
        ok, wit, tol, detail = fn()
    except LoudError as exc:
        ok, wit, tol, detail = False, None, None, {"error": f"{type(exc).__name__}: {exc}"}
    return Check(suite, stage, bool(ok), wit, tol, 1e3 * (time.perf_counter() - t0), detail)


# -- specfun ------------------------------------------------------------------


def _mellin_cases(n, rng):
    """Random (f, taylor, alpha, x) with known Taylor data."""
    cases = []
    for _ in range(n):
        kind = rng.integers(3)
        c = float(rng.uniform(-1.5, 1.5))
        alpha = float(rng.uniform(-2.5, 2.5))
        if abs(alpha - round(alpha)) < 0.05:
            alpha += 0.1
        x = float(rng.uniform(0.2, 1.5))
        k = max(0, math.floor(alpha) + 1)
        if kind == 0:
            f = (lambda c: lambda s: math.exp(c * s))(c)
            tay = [c**i / math.factorial(i) for i in range(k)]
        elif kind == 1:
            c = abs(c) * 0.5
            f = (lambda c: lambda s: 1.0 / (1.0 + c * s))(c)
            tay = [(-c) ** i for i in range(k)]
        else:
            f = (lambda c: lambda s: math.cos(c * s))(c)
            tay = [0.0 if i % 2 else (-1) ** (i // 2) * c**i / math.factorial(i) for i in range(k)]
        cases.append((f, tay, alpha, x))
    return cases


def _mellin_relation(seed):
    """x^-a f_hat(x) at x2 minus x1 against the quadrature of f s^(-a-1) over [x1, x2].

    This is the defining relation x d/dx f_hat - a f_hat = f in integrated form.
    """
    rng = np.random.default_rng(seed)
    worst, wit = 0.0, None
    for f, tay, alpha, x in _mellin_cases(50, rng):
        x2 = 1.5 * x
        lhs = x2**-alpha * sf.mellin_hat(sf.MellinInput(f, tay, alpha, x2)) - x**-alpha * sf.mellin_hat(
            sf.MellinInput(f, tay, alpha, x))
        rhs = float(mp.quad(lambda t: f(float(t)) * t ** (-alpha - 1), [x, x2]))
        err = abs(lhs - rhs) / max(1.0, abs(rhs))
        if err > worst:
            worst, wit = err, [alpha, x]
    return worst < 1e-6, wit, 1e-6, {"max_rel_err": worst, "cases": 50, "seed": seed}


def _series_mellin_at_one(coef, alpha, k, tail_fn, u0=mp.mpf(1) / 4):
    """g_hat(alpha, 1) for g = sum coef[i] u^i: exact series on [0, u0], quadrature above."""
    head = sum(coef[i] / (i - alpha) for i in range(k))
    near = sum(coef[i] * u0 ** (i - alpha) / (i - alpha) for i in range(k, len(coef)))

    def inner(u):
        t = sum(coef[i] * u**i for i in range(k))
        return (tail_fn(u) - t) * u ** (-alpha - 1)

    return head + near + mp.quad(inner, [u0, 1])


def _b2f1_a_oracle(alpha, delta, kappa, n=120):
    """lim y^-alpha h_hat(alpha, y) = h_hat(alpha, 1) + int_1^inf h u^(-alpha-1) du in mpmath."""
    k = max(0, math.floor(alpha) + 1)
    coef = [mp.binomial(delta, i // 2) * mp.mpf(kappa) ** (i // 2) if i % 2 == 0 else mp.mpf(0) for i in range(n)]

    def h(u):
        return (1 + kappa * u * u) ** delta

    at_one = _series_mellin_at_one(coef, alpha, k, h)
    return float(at_one + mp.quad(lambda u: h(u) * u ** (-alpha - 1), [1, mp.inf]))


def _b2f1_b_oracle(alpha, delta, gam, x, n=120):
    """g_hat(alpha, 1) in mpmath, with g's Taylor series built by convolution."""
    k = max(0, math.floor(alpha) + 1)
    a = [mp.rf(1 - delta, i) / mp.factorial(i) for i in range(n)]
    b = [mp.rf(gam, i) * mp.mpf(x) ** i / mp.factorial(i) for i in range(n)]
    coef = [mp.fsum(a[j] * b[i - j] for j in range(i + 1)) for i in range(n)]

    def g(u):
        return (1 - u) ** (delta - 1) * (1 - x * u) ** (-gam)

    return float(_series_mellin_at_one(coef, alpha, k, g))


B2_A_TUPLES = (
    (-0.5, -1.0, 1.0), (-1.3, -0.9, 0.5), (0.5, -0.5, 2.0), (1.5, 0.3, 1.0), (0.3, -2.0, 0.7),
    (-0.7, -0.8, 3.0), (2.5, 1.0, 0.4), (1.2, -0.4, 1.5), (-2.2, -1.5, 0.9), (0.8, 0.1, 2.5),
)
B2_B_TUPLES = (
    (-0.5, 0.5, 1.0, 0.3), (0.5, 1.5, -0.5, -0.5), (1.5, 2.0, 3.5, -0.8), (-1.5, 0.7, 0.2, 0.6),
    (0.3, 1.2, -1.0, 0.2), (2.5, 3.0, 1.5, -0.3), (-0.3, 0.4, 2.0, -1.5), (1.2, 2.5, -2.0, 0.4),
    (0.7, 0.9, 0.5, -0.9), (-2.5, 1.0, 1.0, 0.5),
)


def _b2f1(which):
    with mp.workdps(30):
        worst, wit = 0.0, None
        tuples = B2_A_TUPLES if which == "a" else B2_B_TUPLES
        for tup in tuples:
            if which == "a":
                val, ref = sf.b2f1_limit_a(*tup), _b2f1_a_oracle(*tup)
            else:
                val, ref = sf.b2f1_limit_b(*tup), _b2f1_b_oracle(*tup)
            err = abs(val - ref) / max(1.0, abs(ref))
            if err >= worst:
                worst, wit = err, list(tup)
    return worst < 1e-8, wit, 1e-8, {"max_rel_err": worst, "tuples": len(tuples)}


def suite_specfun(seed: int = 0) -> list:
    S = "specfun"

    def gamma_half():
        err = abs(sf.gamma(0.5) - math.sqrt(math.pi))
        return err < 1e-13, 0.5, 1e-13, {"abs_err": err}

    def cubic():
        xs = np.linspace(-0.9, 0.9, 20)
        errs = [abs(sf.hyp2f1(-3, -0.5, -1.5, x) - (x + 1) * (x - 1) ** 2) for x in xs]
        k = int(np.argmax(errs))
        return errs[k] < 1e-12, float(xs[k]), 1e-12, {"max_abs_err": errs[k]}

    def beta_neg():
        b = sf.beta(-1 / 3, -1.5)
        q = sf.gamma(-1 / 3) * sf.gamma(-1.5) / sf.gamma(-1 / 3 - 1.5)
        err = abs(b - q) / abs(q)
        return err < 1e-12 and round(b, 1) == -2.6, b, 1e-12, {"gamma_quotient": q, "rel_err": err}

    return [
        _check(S, "gamma_half", gamma_half),
        _check(S, "hyp2f1_cubic", cubic),
        _check(S, "beta_negative", beta_neg),
        _check(S, "mellin_relation", lambda: _mellin_relation(seed)),
        _check(S, "b2f1_a", lambda: _b2f1("a")),
        _check(S, "b2f1_b", lambda: _b2f1("b")),
    ]


# -- expansion ----------------------------------------------------------------

FLAT_CFG = IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15)


def gamma1_flatness(nu=(-0.5, 0.75), s0=0.08, k=7, exponent=2.8, cfg=FLAT_CFG):
    """|P/2 - (T00 + T20 s^2)| / s^exponent on s = s0 2^-j, j < k."""
    c = gamma1_coeffs(nu)
    ss = [s0 * 2.0**-j for j in range(k)]
    ratios = [(half_period_physical(s, nu, cfg) - (c.T00 + c.T20 * s * s)) / s**exponent for s in ss]
    return ss, ratios


def gamma2_residual_slope(nu=(-1.2, 1.4), s0=0.01, k=6, cfg=FLAT_CFG):
    """Log-log slope of the residual of the four-term model over k dyadic s."""
    model = build_model(nu)
    ss = np.array([s0 * 2.0**-j for j in range(k)])
    res = np.array([abs(half_period_physical(s, nu, cfg) - sum(t.value(s) for t in model.terms)) for s in ss])
    slope = float(np.polyfit(np.log(ss), np.log(res), 1)[0])
    return slope, ss, res, model


def suite_expansion(seed: int = 0) -> list:
    S = "expansion"

    def t01_zero():
        v = gamma2_coeffs((-0.5, 2.0)).T01
        return abs(v) < 1e-14, v, 1e-14, {}

    def t10_zero():
        v = gamma2_coeffs((-1.0, 1.25)).T10
        return abs(v) < 1e-12, v, 1e-12, {}

    def t101_half():
        z = gamma2_resonance_coeffs((-0.5, 2.0), "lambda_half").T101_half
        lo = gamma2_resonance_coeffs((-0.5 - 1e-3, 2.0), "lambda_half").T101_half
        hi = gamma2_resonance_coeffs((-0.5 + 1e-3, 2.0), "lambda_half").T101_half
        diffs = {}
        for D in (-1.0, -0.3):
            cf = gamma2_resonance_coeffs((D, 2.0), "lambda_half").T101_half
            diffs[str(D)] = abs(cf - t101_half_limit(D))
        ok = abs(z) < 1e-8 and lo * hi < 0 and max(diffs.values()) < 1e-6
        return ok, -0.5, [1e-8, 1e-6], {"at_zero": z, "left": lo, "right": hi, "closed_vs_limit": diffs}

    def gamma3():
        t1 = gamma3_coeffs(-0.5).T1
        D = -0.3
        lim = t10_limit_at_F1(D)
        ref = (2 * D + 1) / (1 + D) ** 1.5
        return t1 == 0.0 and abs(lim - ref) < 1e-4, D, 1e-4, {"T1_at_half": t1, "limit": lim, "closed": ref}

    def flat1():
        ss, r = gamma1_flatness()
        a = [abs(v) for v in r]
        ok = all(a[j + 1] <= a[j] * 1.05 for j in range(len(a) - 1))
        return ok, [-0.5, 0.75], "non-increasing", {"s": ss, "ratio": r}

    def slope2():
        slope, ss, res, model = gamma2_residual_slope()
        lam = 1.0 / (2 * 0.4)
        need = lam + 1 - 0.2
        return slope >= need, [-1.2, 1.4], need, {"slope": slope, "s": list(ss), "residual": list(res)}

    return [
        _check(S, "T01_zero_F2", t01_zero),
        _check(S, "T10_zero_D-1", t10_zero),
        _check(S, "T101_half", t101_half),
        _check(S, "gamma3_limits", gamma3),
        _check(S, "gamma1_flatness", flat1),
        _check(S, "gamma2b_slope", slope2),
    ]


# -- other suites -------------------------------------------------------------


def suite_isochrones(seed: int = 0, tol: float = 1e-6) -> list:
    out = []
    for iso in ISOCHRONES:
        def fn(iso=iso):
            err = verify_isochrone(iso)
            return err < tol, list(iso), tol, {"max_abs_err": err}
        out.append(_check("isochrones", f"isochrone_{iso[0]:g}_{iso[1]:g}", fn))
    return out


def suite_nu_star(seed: int = 0) -> list:
    S = "nu-star"

    def star():
        nu = locate_nu_star()
        c = gamma2_coeffs(nu)
        ok = abs(nu.D + 1.128) < 1e-3 and abs(c.T10) < 1e-10 and abs(c.T01) < 1e-10
        return ok, nu, 1e-3, {"D_star": nu.D, "F_star": nu.F, "T10": c.T10, "T01": c.T01, "T20": c.T20}

    def endpoints():
        g54 = solve_G(1.25).D
        g101 = solve_G(1.01).D
        ok = abs(g54 + 1.0) < 1e-8 and -0.6 < g101 < -0.5
        return ok, [g54, g101], 1e-8, {"G(5/4)": g54, "G(1.01)": g101}

    return [_check(S, "nu_star", star), _check(S, "G_endpoints", endpoints)]


def suite_bautin(seed: int = 0) -> list:
    from .exactpoly import RationalPolynomial

    def ident():
        c = verify_bautin_identity()
        return c.ok, str(c.det_at_nu0), "exact", {
            "residual_p2_zero": c.residual_p2.is_zero(), "residual_p4_zero": c.residual_p4.is_zero()}

    def mutation():
        D, _F = RationalPolynomial.variables()
        c = verify_bautin_identity(q12=10 * D)
        return (not c.ok) and not c.residual_p2.is_zero(), repr(c.residual_p2), "exact", {}

    return [_check("bautin", "identity", ident), _check("bautin", "mutation_detected", mutation)]


def suite_positivity(seed: int = 0) -> list:
    S = "appendix-c"
    out = []
    rep = verify_appC_pipeline(seed=seed)
    for st in rep.stages:
        out.append(Check(S, st.stage, st.verdict, st.witness, st.tolerance, st.elapsed_ms,
                         {**st.detail, "precision": st.precision}))

    def f_ends():
        e0 = abs(eval_F_appC(0.0) - 75 / 16)
        e1 = abs(eval_F_appC(1.0) - 4 / math.pi)
        e5 = abs(eval_F_appC(0.5) - eval_F_appC(0.5, "beta"))
        return max(e0, e1) < 1e-12 and e5 < 1e-12, [0.0, 1.0], 1e-12, {"F0": e0, "F1": e1, "routes_at_half": e5}

    def rho1_fd():
        a, h = 0.5, 1e-4
        # one-sided second-order difference at b = 0
        fd = -(-3 * eval_Phi(a, 0.0) + 4 * eval_Phi(a, h) - eval_Phi(a, 2 * h)) / (2 * h)
        r1 = eval_rho_appC(1, a)
        err = abs(fd - r1) / abs(r1)
        return err < 1e-6, a, 1e-6, {"rho1": r1, "finite_difference": fd}

    out.append(_check(S, "F_endpoints", f_ends))
    out.append(_check(S, "rho1_vs_Phi", rho1_fd))
    return out


SUITES = {
    "specfun": suite_specfun,
    "expansion": suite_expansion,
    "appendix-c": suite_positivity,
    "bautin": suite_bautin,
    "isochrones": suite_isochrones,
    "nu-star": suite_nu_star,
}


def run_suite(name: str, seed: int = 0) -> list:
    return SUITES[name](seed=seed)
