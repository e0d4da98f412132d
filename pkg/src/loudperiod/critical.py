"""Critical periods, the curve D = G(F), the point nu_star and coefficient fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import specfun as sf
from .core import ISOCHRONES, Parameter, _as_param, annulus_anchor, classify_region, hyperbola_params, RegionTag
from .errors import (
    BracketError,
    DomainError,
    IllConditionedError,
    LoudError,
    NotIsochroneError,
)
from .expansion import ExpansionModel, build_model, gamma1_coeffs, gamma2_coeffs, gamma3_coeffs
from .flow import IntegratorConfig, half_period, half_period_physical, period_derivatives

__all__ = [
    "Root",
    "RootReport",
    "CurvePoint",
    "FitResult",
    "ProbeResult",
    "find_critical_periods",
    "solve_G",
    "t10_factor",
    "locate_nu_star",
    "nu_star_grid",
    "verify_isochrone",
    "fit_coefficients",
    "criticality_probe",
    "criticality_probe_detail",
]


@dataclass(frozen=True)
class Root:
    s: float  # normalized section coordinate
    s_phys: float
    bracket: tuple
    multiplicity: int


@dataclass
class RootReport:
    roots: list
    s_range: tuple
    grid: int
    xi: float
    ambiguous: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def simple(self) -> list:
        return [r for r in self.roots if r.multiplicity == 1]


def _s_grid(lo, hi, n):
    if hi / lo > 10.0:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def find_critical_periods(
    nu,
    s_range=(0.01, 0.9),
    grid: int = 60,
    cfg: IntegratorConfig | None = None,
    refine_tol: float = 1e-8,
) -> RootReport:
    """Zeros of P' on a normalized s-range, bracketed on a grid and refined by bisection.

    A cell counts as a simple root when P' changes sign and both end values
    exceed ten times their error estimate.  Sign changes inside the noise band
    are listed as ambiguous; a cell where P' is noise but P'' changes sign
    clear of its own noise is a double-root candidate.
    """
    cfg = cfg or IntegratorConfig()
    nu = _as_param(nu)
    lo, hi = map(float, s_range)
    if not (0.0 < lo < hi < 1.0):
        raise DomainError(f"need 0 < lo < hi < 1, got {s_range}")
    xi = annulus_anchor(nu)
    lo = max(lo, cfg.s_floor * (1.0 + 1e-6))
    ss = _s_grid(lo, hi, grid)
    samples = []
    failures = []
    for s in ss:
        try:
            samples.append((s, period_derivatives(s * xi, nu, cfg)))
        except LoudError as exc:
            failures.append((float(s), str(exc)))
            samples.append((s, None))

    def p1(s):
        return period_derivatives(s * xi, nu, cfg).P1

    roots, ambiguous = [], []
    for (sa, A), (sb, B) in zip(samples, samples[1:]):
        if A is None or B is None:
            continue
        ea, eb = 10 * A.diagnostics["err_P1"], 10 * B.diagnostics["err_P1"]
        if A.P1 * B.P1 < 0:
            if abs(A.P1) > ea and abs(B.P1) > eb:
                a, b, fa = sa, sb, A.P1
                while b - a > refine_tol:
                    m = 0.5 * (a + b)
                    fm = p1(m)
                    if fm == 0.0:
                        a = b = m
                        break
                    if (fm < 0) == (fa < 0):
                        a, fa = m, fm
                    else:
                        b = m
                r = 0.5 * (a + b)
                roots.append(Root(float(r), float(r * xi), (float(a), float(b)), 1))
            else:
                ambiguous.append((float(sa), float(sb)))
        elif (abs(A.P1) <= ea and abs(B.P1) <= eb and A.P2 * B.P2 < 0
              and abs(A.P2) > 10 * A.diagnostics["err_P2"] and abs(B.P2) > 10 * B.diagnostics["err_P2"]):
            r = 0.5 * (sa + sb)
            roots.append(Root(float(r), float(r * xi), (float(sa), float(sb)), 2))
    return RootReport(roots, (lo, hi), grid, xi, ambiguous, failures)


@dataclass(frozen=True)
class CurvePoint:
    F: float
    D: float
    residual: float


def t10_factor(D: float, F: float) -> float:
    """The 2F1 factor of T10 on W, regularized in its lower parameter.

    Its zero set in W1 = W and 1 < F < 3/2 is the curve D = G(F); T10 has the
    opposite sign there.
    """
    il = 2.0 * (F - 1.0)
    z = hyperbola_params((D, F)).z
    return sf.hyp2f1_regularized(-1.0 - il, -0.5, 0.5 - il, z)


def solve_G(F: float, tol: float = 1e-10) -> CurvePoint:
    """D = G(F) for F in (1, 3/2), the unique zero of T10 with -F < D < -1/2."""
    F = float(F)
    if not 1.0 < F < 1.5:
        raise DomainError(f"solve_G needs F in (1, 3/2); got {F}")
    eps = 1e-9
    lo, hi = -F + eps, -0.5 - eps
    flo, fhi = t10_factor(lo, F), t10_factor(hi, F)
    if flo * fhi > 0:
        raise BracketError(f"no sign change of T10 on ({lo}, {hi}) at F={F}", lo, hi, flo, fhi)
    D = brentq(lambda d: t10_factor(d, F), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    res = abs(gamma2_coeffs((D, F)).T10 or 0.0)
    if res >= tol:
        raise LoudError(f"|T10| = {res:g} at the located root exceeds tol={tol:g}")
    return CurvePoint(F, float(D), res)


def locate_nu_star() -> Parameter:
    """nu_star = (G(4/3), 4/3), where T10 and T01 vanish together."""
    F = 4.0 / 3.0
    return Parameter(solve_G(F).D, F)


def nu_star_grid(n: int = 20, radius: float = 1e-2, width: float = 2e-3) -> list:
    """An n x n parameter lattice inside the ball of given radius about nu_star.

    Rows are lines F = const and columns sit at fixed offsets D - G(F) in
    [-width, width], so the lattice resolves the thin wedge along the curve
    D = G(F) where the sign pattern T10 < 0 < T01 gives two critical periods.
    The F-range is shrunk by the local slope of G so every node lies in the ball.
    """
    star = locate_nu_star()
    m = (solve_G(star.F + 1e-4).D - solve_G(star.F - 1e-4).D) / 2e-4
    half = 0.95 * (radius - width) / math.sqrt(1.0 + m * m)
    out = []
    for dF in np.linspace(-half, half, n):
        F = star.F + dF
        g = solve_G(F).D
        for e in np.linspace(-width, width, n):
            D = g + e
            if (D - star.D) ** 2 + dF**2 <= radius**2:
                out.append(Parameter(D, F))
    return out


def verify_isochrone(nu, cfg: IntegratorConfig | None = None, n: int = 50) -> float:
    """max |P(s) - 2 pi| over n normalized s in [0.02, 0.95]."""
    nu = _as_param(nu)
    if (nu.D, nu.F) not in ISOCHRONES:
        raise NotIsochroneError(f"(D={nu.D}, F={nu.F}) is not one of the four isochrones")
    return max(abs(2.0 * half_period(s, nu, cfg) - 2.0 * math.pi) for s in np.linspace(0.02, 0.95, n))


@dataclass
class FitResult:
    names: list
    values: dict
    residual_norm: float
    cond: float
    closed_form: dict
    rel_err: dict


def _closed_forms(nu) -> dict:
    nu = _as_param(nu)
    try:
        if nu.F == 1.0:
            return gamma3_coeffs(nu.D).present()
        if nu.F < 1.0:
            return gamma1_coeffs(nu).present()
        return gamma2_coeffs(nu).present()
    except LoudError:
        return {}


def fit_coefficients(
    nu,
    model_shape: ExpansionModel | None = None,
    s_grid=None,
    cfg: IntegratorConfig | None = None,
    extra_exponents=(),
    max_cond: float = 1e10,
) -> FitResult:
    """Least-squares coefficients of the model terms against numerical half-periods.

    ``s_grid`` holds physical offsets.  ``extra_exponents`` adds free s^e
    columns that soak up the remainder and are not compared.  Columns are
    scaled to unit norm before the condition number is taken.
    """
    nu = _as_param(nu)
    model_shape = model_shape or build_model(nu)
    cfg = cfg or IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15)
    s = np.asarray(s_grid if s_grid is not None else np.geomspace(1e-3, 1e-2, 12), dtype=float)
    names = [t.name for t in model_shape.terms] + [f"s^{e:g}" for e in extra_exponents]
    cols = [[t.basis(v) for v in s] for t in model_shape.terms]
    cols += [[v**e for v in s] for e in extra_exponents]
    A = np.array(cols, dtype=float).T
    if A.shape[0] < A.shape[1]:
        raise IllConditionedError(f"{A.shape[0]} samples for {A.shape[1]} unknowns", math.inf)
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    cond = float(np.linalg.cond(As))
    if not cond <= max_cond:
        raise IllConditionedError(f"design matrix condition number {cond:.3g} > {max_cond:g}", cond)
    y = np.array([half_period_physical(v, nu, cfg) for v in s])
    sol, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = sol / scale
    values = dict(zip(names, map(float, coef)))
    resid = float(np.linalg.norm(A @ coef - y))
    cf = _closed_forms(nu)
    rel = {}
    for k, v in values.items():
        if k in cf and cf[k] != 0.0:
            rel[k] = abs(v - cf[k]) / abs(cf[k])
    return FitResult(names, values, resid, cond, cf, rel)


@dataclass
class ProbeResult:
    count: int
    witness: Parameter | None
    roots: list
    sampled: int
    skipped: int


def criticality_probe_detail(
    nu0,
    delta: float = 1e-2,
    s0: float = 0.05,
    samples: int = 1000,
    seed: int = 0,
    cfg: IntegratorConfig | None = None,
    grid: int = 40,
) -> ProbeResult:
    """Lower-bound witness for the criticality at nu0 (never an upper bound).

    Draws ``samples`` parameters uniformly from the disc of radius delta
    about nu0 and counts simple zeros of P' for normalized s in (0, s0).
    """
    cfg = cfg or IntegratorConfig()
    nu0 = _as_param(nu0)
    rng = np.random.default_rng(seed)
    best, witness, wroots, skipped = 0, None, [], 0
    lo = cfg.s_floor * 1.01
    for _ in range(samples):
        r = delta * math.sqrt(rng.random())
        th = 2 * math.pi * rng.random()
        nu = Parameter(nu0.D + r * math.cos(th), nu0.F + r * math.sin(th))
        if classify_region(nu) in (RegionTag.Other,):
            skipped += 1
            continue
        try:
            rep = find_critical_periods(nu, (lo, s0), grid, cfg)
        except LoudError:
            skipped += 1
            continue
        k = len(rep.simple)
        if k > best:
            best, witness, wroots = k, nu, [x.s for x in rep.simple]
    return ProbeResult(best, witness, wroots, samples, skipped)


def criticality_probe(nu0, delta=1e-2, s0=0.05, samples=1000, seed=0, cfg=None) -> int:
    return criticality_probe_detail(nu0, delta, s0, samples, seed, cfg).count
