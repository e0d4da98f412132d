"""Real special functions: Gamma, digamma, Beta, 2F1, compensator, incomplete Mellin transform."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, PoleError

__all__ = [
    "gamma",
    "rgamma",
    "loggamma",
    "digamma",
    "trigamma",
    "beta",
    "pochhammer",
    "hyp2f1",
    "hyp2f1_regularized",
    "beta_hyp2f1",
    "compensator",
    "CompensatorArg",
    "MellinInput",
    "mellin_hat",
    "b2f1_limit_a",
    "b2f1_limit_b",
]

EULER_GAMMA = 0.57721566490153286061

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpos_int(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    """sin(pi x) with exact argument reduction."""
    n = round(x)
    f = x - n  # exact for |x| < 2**52
    v = math.sin(math.pi * f)
    return -v if n % 2 else v


def _cospi(x: float) -> float:
    n = round(x)
    f = x - n
    v = math.cos(math.pi * f)
    return -v if n % 2 else v


def _lanczos_positive(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (x + 0.5) * math.exp(-t) * acc


def gamma(x: float) -> float:
    """Gamma function on the real line; PoleError at 0, -1, -2, ..."""
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x == math.floor(x) and x <= 171:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (_sinpi(x) * _lanczos_positive(1.0 - x))
    if x > 20.0:
        # keep the power accurate by recurring down into the well-tested range
        n = int(x - 19.0)
        v = _lanczos_positive(x - n)
        for k in range(n):
            v *= x - n + k
        return v
    return _lanczos_positive(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), entire: zero at the non-positive integers."""
    x = float(x)
    if _is_nonpos_int(x):
        return 0.0
    return 1.0 / gamma(x)


def loggamma(x: float) -> float:
    """log|Gamma(x)|."""
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleError(f"log Gamma has a pole at {x}")
    if x < 0.5:
        return math.log(math.pi / abs(_sinpi(x))) - loggamma(1.0 - x)
    y = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (y + i)
    t = y + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (y + 0.5) * math.log(t) - t + math.log(acc)


# Bernoulli numbers B_2k for the asymptotic series
_B2K = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def digamma(x: float) -> float:
    """Psi = Gamma'/Gamma; PoleError at the non-positive integers."""
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleError(f"digamma has a pole at {x}")
    if x < 0.5:
        return digamma(1.0 - x) - math.pi * _cospi(x) / _sinpi(x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for k, b in enumerate(_B2K, start=1):
        series += b / (2 * k) * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """Psi'(x); PoleError at the non-positive integers."""
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleError(f"trigamma has a pole at {x}")
    if x < 0.5:
        s = _sinpi(x)
        return -trigamma(1.0 - x) + (math.pi / s) ** 2
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    p = inv2 * inv
    for b in _B2K:
        series += b * p
        p *= inv2
    return acc + inv + 0.5 * inv2 + series


def beta(z: float, w: float) -> float:
    """B(z, w) = Gamma(z) Gamma(w) / Gamma(z + w), continued to negative arguments.

    Returns 0 when z + w is a non-positive integer (reciprocal-Gamma convention).
    """
    z, w = float(z), float(w)
    if _is_nonpos_int(z) or _is_nonpos_int(w):
        raise PoleError(f"Beta({z}, {w}) has a pole")
    if _is_nonpos_int(z + w):
        return 0.0
    if max(z, w, z + w) > 150.0:
        sign = math.copysign(1.0, gamma_sign(z) * gamma_sign(w) * gamma_sign(z + w))
        return sign * math.exp(loggamma(z) + loggamma(w) - loggamma(z + w))
    return gamma(z) * gamma(w) * rgamma(z + w)


def gamma_sign(x: float) -> float:
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0


def pochhammer(x: float, n: int) -> float:
    """Rising factorial (x)_n."""
    out = 1.0
    for k in range(n):
        out *= x + k
    return out


_HYP_TERM_TOL = 1e-17
_HYP_MAX_TERMS = 100_000


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    small = 0
    for n in range(_HYP_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= _HYP_TERM_TOL * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
    return total


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.

    |z| <= 1/2 sums the power series directly; z < -1/2 goes through the Pfaff
    transformation to z/(z-1) in (1/3, 1); z in (1/2, 1) uses the Euler
    transformation.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if not z < 1.0:
        raise DomainError(f"2F1 is only evaluated for z < 1; got z={z}")
    if _is_nonpos_int(c):
        raise PoleError(f"2F1 has a pole at c={c}")
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        # terminating series: exact polynomial, no transformation needed
        return _hyp2f1_series(a, b, c, z)
    if abs(z) <= 0.5:
        return _hyp2f1_series(a, b, c, z)
    if z < -0.5:
        w = z / (z - 1.0)
        # pick the Pfaff variant whose new numerator parameter terminates, if any
        if _is_nonpos_int(c - a):
            return (1.0 - z) ** (-b) * _hyp2f1_series(b, c - a, c, w)
        return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w)
    return (1.0 - z) ** (c - a - b) * _hyp2f1_series(c - a, c - b, c, z)


def hyp2f1_regularized(a: float, b: float, c: float, z: float) -> float:
    """2F1(a, b; c; z)/Gamma(c), entire in c."""
    a, b, c, z = float(a), float(b), float(c), float(z)
    if not _is_nonpos_int(c):
        return hyp2f1(a, b, c, z) * rgamma(c)
    m = int(-c)
    coef = pochhammer(a, m + 1) * pochhammer(b, m + 1) / math.factorial(m + 1)
    if coef == 0.0:
        return 0.0
    return coef * z ** (m + 1) * hyp2f1(a + m + 1, b + m + 1, m + 2, z)


def beta_hyp2f1(p: float, q: float, a: float, z: float) -> float:
    """B(p, q) * 2F1(a, q; p + q; z).

    Written as Gamma(p) Gamma(q) * regularized 2F1, so the removable
    singularity when p + q is a non-positive integer is handled exactly.
    """
    return gamma(p) * gamma(q) * hyp2f1_regularized(a, q, p + q, z)


@dataclass(frozen=True)
class CompensatorArg:
    s: float
    alpha: float

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError(f"compensator needs s > 0; got {self.s}")


def compensator(s, alpha: float | None = None) -> float:
    """omega(s; alpha) = (s^-alpha - 1)/alpha, and -log s at alpha = 0.

    Accepts either a CompensatorArg or the pair (s, alpha).
    """
    if isinstance(s, CompensatorArg):
        s, alpha = s.s, s.alpha
    s, alpha = float(s), float(alpha)
    if not s > 0:
        raise DomainError(f"compensator needs s > 0; got {s}")
    L = -math.log(s)
    if alpha == 0.0:
        return L
    if abs(alpha) < 1e-8:
        aL = alpha * L
        return L * (1.0 + aL / 2.0 + aL * aL / 6.0)
    return math.expm1(alpha * L) / alpha


@dataclass(frozen=True)
class MellinInput:
    """Data for the incomplete Mellin transform.

    ``taylor`` holds the Taylor coefficients f^(i)(0)/i! for i < k.
    """

    f: Callable[[float], float]
    taylor: Sequence[float]
    alpha: float
    x: float


def _check_taylor(inp: MellinInput) -> None:
    f, c = inp.f, inp.taylor
    if abs(f(0.0) - c[0]) > 1e-6 * max(1.0, abs(c[0])):
        raise DomainError(f"taylor[0]={c[0]} disagrees with f(0)={f(0.0)}")
    if len(c) >= 2:
        h = 1e-5
        d1 = (f(h) - f(-h)) / (2 * h)
        if abs(d1 - c[1]) > 1e-6 * max(1.0, abs(c[1])):
            raise DomainError(f"taylor[1]={c[1]} disagrees with f'(0)~{d1}")


_EPS = 2.0**-52
_TAIL_TERMS = 7


def _quiet_quad(fn, lo, hi, epsabs):
    # QUADPACK warns when the endpoint singularity caps its own error estimate;
    # accuracy is checked separately against the defining relation.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _err = quad(fn, lo, hi, epsabs=epsabs, epsrel=1e-12, limit=200)
    return val


def _pieces(lo, x):
    """Breakpoints lo < ... < 1 at decades of 1/|x|, where f(x u) varies for large |x|."""
    pts = [lo]
    b = 1.0 / abs(x)
    while b < 1.0:
        if b > lo:
            pts.append(b)
        b *= 10.0
    pts.append(1.0)
    return pts


def mellin_hat(inp: MellinInput, check_taylor: bool = False) -> float:
    """f_hat(alpha, x), the solution of x d/dx f_hat - alpha f_hat = f regular at 0.

    f_hat = sum_{i<k} c_i x^i/(i - alpha)
            + |x|^alpha int_0^x (f(s) - sum_{i<k} c_i s^i) |s|^-alpha ds/s,
    evaluated with the substitution s = x u and adaptive Gauss-Kronrod quadrature.
    """
    alpha, x = float(inp.alpha), float(inp.x)
    c = [float(v) for v in inp.taylor]
    k = len(c)
    if alpha >= 0 and alpha == math.floor(alpha):
        raise DomainError(f"alpha must not be a non-negative integer; got {alpha}")
    if not k > alpha:
        raise DomainError(f"need more Taylor terms than alpha: k={k}, alpha={alpha}")
    if x == 0.0:
        raise DomainError("x must be non-zero")
    if check_taylor:
        _check_taylor(inp)
    poly = sum(ci * x**i / (i - alpha) for i, ci in enumerate(c))
    f = inp.f

    def rem(u):
        s = x * u
        tp = 0.0
        for ci in reversed(c):
            tp = tp * s + ci
        return f(s) - tp

    def integrand(u):
        return rem(u) * u ** (-alpha - 1.0)

    if k == 0:
        pts = _pieces(0.0, x)
        return poly + sum(_quiet_quad(integrand, a, b, 1e-12) for a, b in zip(pts, pts[1:]))
    # Near u = 0 the remainder f - T is lost to cancellation and the weight
    # u^(-alpha-1) amplifies it.  Below uc the remainder is replaced by
    # sum_j a_j (u/uc)^(k+j), j < _TAIL_TERMS, interpolated at uc 2^i where
    # the cancellation is milder, and integrated in closed form.
    m = _TAIL_TERMS
    uc = 0.5 * _EPS ** (1.0 / (k + m))
    v = 2.0 ** np.arange(m)
    V = np.vander(v, m, increasing=True)
    r = np.array([rem(uc * vi) for vi in v]) / v**k
    a = np.linalg.solve(V, r)
    tail = uc**-alpha * sum(a[j] / (k + j - alpha) for j in range(m))
    pts = _pieces(uc, x)
    val = sum(_quiet_quad(integrand, a, b, 1e-13) for a, b in zip(pts, pts[1:]))
    return float(poly + tail + val)


def b2f1_limit_a(alpha: float, delta: float, kappa: float) -> float:
    """lim_{y->inf} y^-alpha h_hat(alpha, y) for h(y) = (1 + kappa y^2)^delta.

    Equals kappa^(alpha/2)/2 * B(-alpha/2, -delta + alpha/2).
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be positive; got {kappa}")
    if not 2 * delta < alpha:
        raise DomainError(f"need 2*delta < alpha; got delta={delta}, alpha={alpha}")
    if alpha >= 0 and alpha == math.floor(alpha):
        raise DomainError(f"alpha must not be a non-negative integer; got {alpha}")
    return kappa ** (alpha / 2) / 2 * beta(-alpha / 2, -delta + alpha / 2)


def b2f1_limit_b(alpha: float, delta: float, gamma_: float, x: float) -> float:
    """lim_{y->1^-} g_hat(alpha, y) for g(y) = (1-y)^(delta-1) (1-xy)^(-gamma).

    Equals B(-alpha, delta) * 2F1(gamma, -alpha; delta - alpha; x).
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive; got {delta}")
    if not x < 1:
        raise DomainError(f"x must be < 1; got {x}")
    if alpha >= 0 and alpha == math.floor(alpha):
        raise DomainError(f"alpha must not be a non-negative integer; got {alpha}")
    return beta_hyp2f1(delta, -alpha, gamma_, x)
