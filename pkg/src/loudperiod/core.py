"""Parameters of the Loud family, region tags and hyperbola geometry.

The family is X = -y(1-x) d/dx + (x + D x^2 + F y^2) d/dy with parameter nu = (D, F).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateError, DomainError

__all__ = [
    "Parameter",
    "RegionTag",
    "Chart",
    "HyperbolaGeometry",
    "ISOCHRONES",
    "classify_region",
    "quadratic_coeffs",
    "hyperbola_params",
    "hyperbolicity_ratio",
    "annulus_anchor",
]


@dataclass(frozen=True)
class Parameter:
    """The pair nu = (D, F)."""

    D: float
    F: float

    def __post_init__(self):
        D, F = float(self.D), float(self.F)
        if not (math.isfinite(D) and math.isfinite(F)):
            raise DomainError(f"parameter entries must be finite, got D={self.D!r}, F={self.F!r}")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "F", F)

    def __iter__(self):
        yield self.D
        yield self.F


class RegionTag(enum.Enum):
    V_gamma1 = "V_gamma1"
    W_gamma2 = "W_gamma2"
    F_equals_1 = "F_equals_1"
    Isochrone = "Isochrone"
    Other = "Other"


class Chart(enum.Enum):
    Gamma1 = "Gamma1"
    Gamma2 = "Gamma2"


# The four nonlinear quadratic isochrones (all have period 2*pi).
ISOCHRONES = ((0.0, 1.0), (-0.5, 2.0), (-0.5, 0.5), (0.0, 0.25))


def _as_param(nu) -> Parameter:
    if isinstance(nu, Parameter):
        return nu
    D, F = nu
    return Parameter(D, F)


def classify_region(nu, tol: float = 0.0) -> RegionTag:
    """Tag nu by chart; isochrones take precedence.

    With the default ``tol=0`` an isochrone must match exactly.  A positive
    ``tol`` accepts parameters within that max-norm distance, which is meant
    for scanned grids whose nodes carry rounding.
    """
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    for Di, Fi in ISOCHRONES:
        if abs(D - Di) <= tol and abs(F - Fi) <= tol:
            return RegionTag.Isochrone
    if -1.0 < D < 0.0:
        if 0.0 < F < 1.0:
            return RegionTag.V_gamma1
        if F == 1.0:
            return RegionTag.F_equals_1
    if F > 1.0 and D < 0.0 and F + D > 0.0:
        return RegionTag.W_gamma2
    return RegionTag.Other


def in_W(nu) -> bool:
    nu = _as_param(nu)
    return nu.F > 1.0 and nu.D < 0.0 and nu.F + nu.D > 0.0


def quadratic_coeffs(nu) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of q(x) = a x^2 + b x + c.

    The curve y^2/2 = q(x) is invariant and H = (1-x)^(-2F) (y^2/2 - q(x)) is a
    first integral.  Undefined at F in {0, 1/2, 1}.
    """
    nu = _as_param(nu)
    D, F = nu.D, nu.F
    if F in (0.0, 0.5, 1.0):
        raise DomainError(f"q(x) is undefined at F={F}")
    a = D / (2.0 * (1.0 - F))
    b = (D - F + 1.0) / ((1.0 - F) * (1.0 - 2.0 * F))
    c = (F - D - 1.0) / (2.0 * F * (1.0 - F) * (1.0 - 2.0 * F))
    return a, b, c


@dataclass(frozen=True)
class HyperbolaGeometry:
    a: float
    b: float
    c: float
    p1: float
    p2: float
    z: float
    lam: float

    @property
    def kappa(self) -> float:
        """p2 - p1."""
        return self.p2 - self.p1


def hyperbola_params(nu) -> HyperbolaGeometry:
    """Roots p1 < p2 of q and the ratio z = (1-p2)/(1-p1) on the region W."""
    nu = _as_param(nu)
    if not in_W(nu):
        raise DomainError(
            f"hyperbola geometry needs nu in W (F>1, D<0, F+D>0); got D={nu.D}, F={nu.F}"
        )
    a, b, c = quadratic_coeffs(nu)
    disc = b * b - 4.0 * a * c
    if disc <= 1e-14 * max(1.0, b * b):
        raise DegenerateError(f"discriminant of q is {disc!r}; roots not distinct")
    sq = math.sqrt(disc)
    # sign-aware form avoids cancellation in the smaller root
    qq = -0.5 * (b + math.copysign(sq, b))
    r1, r2 = qq / a, c / qq
    p1, p2 = (r1, r2) if r1 < r2 else (r2, r1)
    p1 -= (a * p1 * p1 + b * p1 + c) / (2.0 * a * p1 + b)
    p2 -= (a * p2 * p2 + b * p2 + c) / (2.0 * a * p2 + b)
    z = (1.0 - p2) / (1.0 - p1)
    lam = 1.0 / (2.0 * (nu.F - 1.0))
    return HyperbolaGeometry(a, b, c, p1, p2, z, lam)


def hyperbolicity_ratio(nu, chart) -> float:
    """F/(1-F) for Gamma1, 1/(2(F-1)) for Gamma2."""
    nu = _as_param(nu)
    chart = Chart(chart) if not isinstance(chart, Chart) else chart
    F = nu.F
    if chart is Chart.Gamma1:
        if F == 1.0:
            raise DomainError("hyperbolicity ratio F/(1-F) has a pole at F=1")
        return F / (1.0 - F)
    if F <= 1.0:
        raise DomainError(f"Gamma2 ratio needs F>1, got F={F}")
    return 1.0 / (2.0 * (F - 1.0))


def annulus_anchor(nu) -> float:
    """x-coordinate xi where the outer boundary meets the positive x-axis.

    1 when F <= 1 and p1 when F > 1.  Defined on the three charts, on the
    four isochrones and on the edge D=0, F>1 of W, where q is linear and
    the boundary is the parabola y^2/2 = q(x) through (-c/b, 0).
    """
    nu = _as_param(nu)
    tag = classify_region(nu)
    if tag is RegionTag.Other and nu.D == 0.0 and nu.F > 1.0:
        _, b, c = quadratic_coeffs(nu)
        return -c / b
    if tag is RegionTag.Other:
        raise DomainError(
            f"annulus anchor is only defined on Gamma1/Gamma2/F=1 charts and isochrones; "
            f"got D={nu.D}, F={nu.F}"
        )
    if nu.D == 0.0 and nu.F == 1.0:
        # at (0, 1) the annulus is bounded by the invariant parabola y^2 = 1 - 2x
        return 0.5
    if nu.F <= 1.0:
        return 1.0
    return hyperbola_params(nu).p1
