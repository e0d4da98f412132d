"""Exact rational polynomials, Sturm root counting and the exact checks.

Univariate and bivariate polynomials carry Fraction coefficients only, so
arithmetic never rounds.  Sturm counting is exact over Q; polynomials whose
coefficients involve log 2 and pi are handled by interval enclosures (mpmath.iv)
with precision doubled until every sign in the chain is decided.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import zip_longest

import numpy as np
from mpmath import iv

from . import specfun as sf
from .errors import DegenerateError, DomainError, LoudError

__all__ = [
    "RationalPolynomial",
    "SturmChain",
    "SturmResult",
    "IntervalSturmResult",
    "BautinCheck",
    "StageResult",
    "PipelineReport",
    "sturm_chain",
    "sturm_count",
    "sturm_count_detail",
    "bisection_count",
    "interval_sturm_count",
    "discriminant_cubic",
    "resultant",
    "discriminant",
    "bautin_polynomials",
    "verify_bautin_identity",
    "eval_F_appC",
    "eval_Phi",
    "eval_rho_appC",
    "eval_P_appC",
    "eval_g_appC",
    "R_polynomial",
    "eval_R",
    "discrim_b_from_rho",
    "discrim_b_from_R",
    "P0_COEFFS",
    "P1_COEFFS",
    "verify_appC_pipeline",
]


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        if not math.isfinite(c):
            raise DomainError(f"polynomial coefficient must be finite, got {c!r}")
        return Fraction(c)
    return Fraction(c)


class RationalPolynomial:
    """Dense polynomial with exact rational coefficients in one or two variables.

    Arity 1: ``coeffs[i]`` multiplies x^i.  Arity 2: ``coeffs[i][j]`` multiplies
    x^i y^j.  Trailing zeros are trimmed so the leading coefficient is nonzero;
    the zero polynomial has empty ``coeffs``.  Instances are immutable.
    """

    __slots__ = ("coeffs", "arity")

    def __init__(self, coeffs=(), arity: int = 1):
        if arity not in (1, 2):
            raise DomainError(f"arity must be 1 or 2, got {arity}")
        if arity == 1:
            cs = [_frac(c) for c in coeffs]
            while cs and cs[-1] == 0:
                cs.pop()
            cs = tuple(cs)
        else:
            rows = []
            for row in coeffs:
                r = [_frac(c) for c in row]
                while r and r[-1] == 0:
                    r.pop()
                rows.append(tuple(r))
            while rows and not rows[-1]:
                rows.pop()
            cs = tuple(rows)
        object.__setattr__(self, "coeffs", cs)
        object.__setattr__(self, "arity", arity)

    def __setattr__(self, name, value):
        raise AttributeError("RationalPolynomial is immutable")

    # constructors

    @classmethod
    def const(cls, c, arity: int = 1) -> "RationalPolynomial":
        return cls([c], 1) if arity == 1 else cls([[c]], 2)

    @classmethod
    def x(cls) -> "RationalPolynomial":
        return cls([0, 1])

    @classmethod
    def variables(cls) -> tuple:
        """The two generators (x, y) of Q[x, y]."""
        return cls([[0], [1]], 2), cls([[0, 1]], 2)

    @classmethod
    def from_terms(cls, terms: dict, arity: int) -> "RationalPolynomial":
        if arity == 1:
            n = max((k for k, v in terms.items() if v != 0), default=-1)
            cs = [Fraction(0)] * (n + 1)
            for k, v in terms.items():
                if k <= n:
                    cs[k] += v
            return cls(cs, 1)
        n = max((i for (i, _), v in terms.items() if v != 0), default=-1)
        rows = [dict() for _ in range(n + 1)]
        for (i, j), v in terms.items():
            if i <= n:
                rows[i][j] = rows[i].get(j, Fraction(0)) + v
        dense = []
        for r in rows:
            m = max(r, default=-1)
            dense.append([r.get(j, 0) for j in range(m + 1)])
        return cls(dense, 2)

    def terms(self) -> dict:
        if self.arity == 1:
            return {i: c for i, c in enumerate(self.coeffs) if c != 0}
        return {(i, j): c for i, row in enumerate(self.coeffs) for j, c in enumerate(row) if c != 0}

    # basic queries

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree in x for arity 1, total degree for arity 2; -1 for zero."""
        if self.arity == 1:
            return len(self.coeffs) - 1
        return max((i + j for (i, j) in self.terms()), default=-1)

    @property
    def lead(self) -> Fraction:
        self._need_univariate()
        if not self.coeffs:
            raise DegenerateError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def _need_univariate(self):
        if self.arity != 1:
            raise DomainError("operation needs a univariate polynomial")

    def _coerce(self, other) -> "RationalPolynomial":
        if isinstance(other, RationalPolynomial):
            if other.arity != self.arity:
                raise DomainError("arity mismatch")
            return other
        return RationalPolynomial.const(other, self.arity)

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        if self.arity == 1:
            return RationalPolynomial([a + b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=0)])
        t = self.terms()
        for k, v in other.terms().items():
            t[k] = t.get(k, 0) + v
        return RationalPolynomial.from_terms(t, 2)

    __radd__ = __add__

    def __neg__(self):
        if self.arity == 1:
            return RationalPolynomial([-c for c in self.coeffs])
        return RationalPolynomial([[-c for c in row] for row in self.coeffs], 2)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.arity == 1:
            if self.is_zero() or other.is_zero():
                return RationalPolynomial()
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        out[i + j] += a * b
            return RationalPolynomial(out)
        out = {}
        for (i, j), a in self.terms().items():
            for (k, l), b in other.terms().items():
                out[(i + k, j + l)] = out.get((i + k, j + l), 0) + a * b
        return RationalPolynomial.from_terms(out, 2)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise DomainError("only nonnegative integer powers")
        out = RationalPolynomial.const(1, self.arity)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, RationalPolynomial):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.arity == other.arity and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.arity, self.coeffs))

    def __repr__(self):
        if self.is_zero():
            return "RationalPolynomial(0)"
        if self.arity == 1:
            parts = [f"{c}*x^{i}" for i, c in enumerate(self.coeffs) if c]
        else:
            parts = [f"{c}*x^{i}*y^{j}" for (i, j), c in sorted(self.terms().items())]
        return "RationalPolynomial(" + " + ".join(parts) + ")"

    # evaluation

    def __call__(self, *args):
        if len(args) != self.arity:
            raise DomainError(f"expected {self.arity} arguments, got {len(args)}")
        if self.arity == 1:
            return _horner(self.coeffs, args[0])
        x, y = args
        rows = [_horner(row, y) for row in self.coeffs]
        return _horner(rows, x)

    def map_coeffs(self, fn) -> list:
        """Coefficients mapped through ``fn`` (no trimming), for foreign number types."""
        self._need_univariate()
        return [fn(c) for c in self.coeffs]

    # univariate algebra

    def derivative(self) -> "RationalPolynomial":
        self._need_univariate()
        return RationalPolynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "RationalPolynomial"):
        self._need_univariate()
        other._need_univariate()
        if other.is_zero():
            raise DegenerateError("division by the zero polynomial")
        r = list(self.coeffs)
        n = len(other.coeffs) - 1
        lc = other.coeffs[-1]
        q = [Fraction(0)] * max(len(r) - n, 0)
        for k in range(len(r) - n - 1, -1, -1):
            f = r[k + n] / lc
            q[k] = f
            if f:
                for j, c in enumerate(other.coeffs):
                    r[k + j] -= f * c
        return RationalPolynomial(q), RationalPolynomial(r[:n])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def monic(self) -> "RationalPolynomial":
        return RationalPolynomial([c / self.lead for c in self.coeffs])

    def gcd(self, other: "RationalPolynomial") -> "RationalPolynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def squarefree(self) -> "RationalPolynomial":
        g = self.gcd(self.derivative())
        return self // g if g.degree > 0 else self


def _horner(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# Sturm sequences over Q


@dataclass(frozen=True)
class SturmChain:
    """p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k)."""

    seq: tuple

    def variations(self, x: Fraction) -> int:
        return _variations([q(x) for q in self.seq])


def _variations(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_chain(p: RationalPolynomial) -> SturmChain:
    p._need_univariate()
    if p.is_zero():
        raise DegenerateError("Sturm chain of the zero polynomial")
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    return SturmChain(tuple(seq[:-1]))


@dataclass(frozen=True)
class SturmResult:
    count: int
    interval: tuple
    endpoint_roots: tuple = ()  # (endpoint, multiplicity) deflated before counting


def _deflate(p: RationalPolynomial, r: Fraction):
    lin = RationalPolynomial([-r, 1])
    m = 0
    while not p.is_zero() and p(r) == 0:
        p, rem = p.divmod(lin)
        m += 1
    return p, m


def sturm_count_detail(p: RationalPolynomial, interval) -> SturmResult:
    """Distinct real roots of p in the open interval, counted exactly.

    A root sitting on an endpoint is divided out exactly before counting and
    reported in ``endpoint_roots``; it is not in the open interval.
    """
    lo, hi = (_frac(v) for v in interval)
    if not lo < hi:
        raise DomainError(f"need lo < hi, got ({lo}, {hi})")
    p._need_univariate()
    if p.is_zero():
        raise DegenerateError("the zero polynomial has infinitely many roots")
    found = []
    for r in (lo, hi):
        p, m = _deflate(p, r)
        if m:
            found.append((r, m))
    if p.degree <= 0:
        return SturmResult(0, (lo, hi), tuple(found))
    ch = sturm_chain(p)
    return SturmResult(ch.variations(lo) - ch.variations(hi), (lo, hi), tuple(found))


def sturm_count(p: RationalPolynomial, interval) -> int:
    return sturm_count_detail(p, interval).count


def _descartes(coeffs) -> int:
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _taylor_shift(coeffs, t):
    """Coefficients of p(x + t)."""
    c = list(coeffs)
    n = len(c)
    for i in range(n):
        for k in range(n - 2, i - 1, -1):
            c[k] += t * c[k + 1]
    return c


def bisection_count(p: RationalPolynomial, interval) -> int:
    """Distinct real roots in the open interval by Descartes-rule bisection.

    An independent exact counter used as an oracle for Sturm: the squarefree
    part is mapped to (0, 1) and bisected until the Descartes bound of
    (x+1)^n q(1/(x+1)) on each piece is 0 or 1.
    """
    lo, hi = (_frac(v) for v in interval)
    if not lo < hi:
        raise DomainError(f"need lo < hi, got ({lo}, {hi})")
    q = p.squarefree()
    if q.degree <= 0:
        return 0
    # r(u) = q(lo + (hi - lo) u), roots of q in (lo, hi) <-> roots of r in (0, 1)
    r = _taylor_shift(q.coeffs, lo)
    w = hi - lo
    r = [c * w**i for i, c in enumerate(r)]
    count = 0
    stack = [(r, 0)]
    while stack:
        c, depth = stack.pop()
        # roots in (0, 1): reverse then shift by 1
        v = _descartes(_taylor_shift(list(reversed(c)), 1))
        if v == 0:
            continue
        if v == 1:
            count += 1
            continue
        if depth > 200:
            raise LoudError("bisection depth exceeded")
        left = [ci / 2**i for i, ci in enumerate(c)]  # c(u/2)
        right = _taylor_shift(left, 1)  # c((u+1)/2)
        if right[0] == 0:  # midpoint is a root
            count += 1
            right = right[1:]
        stack.append((left, depth + 1))
        if len(right) > 1:
            stack.append((right, depth + 1))
    return count


# ---------------------------------------------------------------------------
# interval-coefficient Sturm

LOG2 = "log2"
PI = "pi"

# p0 and p1 of the tangent-line argument as linear forms c + l*log2 + p*pi,
# listed from the constant term upward.
P0_COEFFS = (
    (1860, 0, 0),
    (7688, -7500, 0),
    (-9957, 750, 0),
    (3479, 2250, 0),
    (-393, 0, 0),
    (23, 0, 0),
)
P1_COEFFS = (
    (3200, 19200, -5640),
    (2880, -21120, 11438),
    (-1280, -3840, -8007),
    (-960, 5760, 2579),
    (0, 0, -393),
    (0, 0, 23),
)


@dataclass(frozen=True)
class IntervalSturmResult:
    count: int
    interval: tuple
    dps: int
    chain_length: int


class _Undecided(Exception):
    pass


def _isign(x) -> int:
    if x.a > 0:
        return 1
    if x.b < 0:
        return -1
    if x.a == 0 and x.b == 0:
        return 0
    raise _Undecided


def _ipoly_rem(a, b):
    """Remainder of interval polynomials; the cancelled leading terms are dropped."""
    r = list(a)
    n = len(b) - 1
    lc = b[-1]
    for k in range(len(r) - n - 1, -1, -1):
        f = r[k + n] / lc
        for j in range(n):
            r[k + j] = r[k + j] - f * b[j]
        r[k + n] = iv.mpf(0)
    r = r[:n]
    while r and _isign(r[-1]) == 0:
        r.pop()
    return r


def _ieval(cs, x):
    acc = iv.mpf(0)
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def _interval_sturm(cs, lo, hi):
    p = list(cs)
    while p and _isign(p[-1]) == 0:
        p.pop()
    if len(p) < 2:
        return 0, len(p)
    dp = [i * c for i, c in enumerate(p)][1:]
    seq = [p, dp]
    while len(seq[-1]) > 0:
        if len(seq[-1]) == 1:
            break
        r = _ipoly_rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    for q in seq:
        _isign(q[-1])  # every leading coefficient must be decided
    vlo = _variations_signs([_isign(_ieval(q, lo)) for q in seq])
    vhi = _variations_signs([_isign(_ieval(q, hi)) for q in seq])
    return vlo - vhi, len(seq)


def _variations_signs(signs) -> int:
    s = [v for v in signs if v != 0]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


class _ivdps:
    """Temporarily set the working precision of mpmath.iv."""

    def __init__(self, dps):
        self.dps = dps

    def __enter__(self):
        self.old = iv.dps
        iv.dps = self.dps

    def __exit__(self, *exc):
        iv.dps = self.old


def _enclose(forms, dps):
    """Interval enclosures of linear forms c + l*log2 + p*pi at ``dps`` digits."""
    with _ivdps(dps):
        L, P = iv.log(2), iv.pi
        out = []
        for c, l, p in forms:
            out.append(iv.mpf(Fraction(c).numerator) / Fraction(c).denominator + l * L + p * P)
        return out


def interval_sturm_count(forms, interval, dps: int = 60, max_dps: int = 240) -> IntervalSturmResult:
    """Sturm count for a polynomial whose coefficients are c + l*log2 + p*pi.

    The coefficients are enclosed at ``dps`` digits and the chain is built in
    interval arithmetic.  A sign is accepted only when its interval excludes
    zero; otherwise the precision is doubled, up to ``max_dps``.  Endpoints
    must be rational and must not be roots.
    """
    lo, hi = (_frac(v) for v in interval)
    if not lo < hi:
        raise DomainError(f"need lo < hi, got ({lo}, {hi})")
    d = dps
    while d <= max_dps:
        try:
            with _ivdps(d):
                cs = _enclose(forms, d)
                ilo = iv.mpf(lo.numerator) / lo.denominator
                ihi = iv.mpf(hi.numerator) / hi.denominator
                count, n = _interval_sturm(cs, ilo, ihi)
            return IntervalSturmResult(count, (lo, hi), d, n)
        except _Undecided:
            d *= 2
    raise DegenerateError(f"sign undecided at {max_dps} digits on ({lo}, {hi})")


def _forms_value(forms, x: float) -> float:
    l2, pi = math.log(2.0), math.pi
    return _horner([c + l * l2 + p * pi for c, l, p in forms], x)


# ---------------------------------------------------------------------------
# discriminants and resultants


def discriminant_cubic(c3, c2, c1, c0):
    """Discriminant of c3 x^3 + c2 x^2 + c1 x + c0.

    Works for any ring-like type (Fraction, float, mpmath interval).
    """
    if c3 == 0:
        raise DegenerateError("leading coefficient of the cubic is zero")
    a, b, c, d = c3, c2, c1, c0
    return 18 * a * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * a * c**3 - 27 * a * a * d * d


def _det(m):
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = [list(map(Fraction, row)) for row in m]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def resultant(p: RationalPolynomial, q: RationalPolynomial) -> Fraction:
    """Res(p, q) as the Sylvester determinant."""
    p._need_univariate()
    q._need_univariate()
    m, n = p.degree, q.degree
    if m < 0 or n < 0:
        return Fraction(0)
    size = m + n
    if size == 0:
        return Fraction(1)
    rows = []
    pc = list(reversed(p.coeffs))
    qc = list(reversed(q.coeffs))
    for i in range(n):
        rows.append([0] * i + pc + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + qc + [0] * (size - n - 1 - i))
    return _det(rows)


def discriminant(p: RationalPolynomial) -> Fraction:
    """(-1)^(n(n-1)/2) Res(p, p') / lead(p)."""
    n = p.degree
    if n < 1:
        raise DegenerateError("discriminant needs degree >= 1")
    s = -1 if (n * (n - 1) // 2) % 2 else 1
    return s * resultant(p, p.derivative()) / p.lead


# ---------------------------------------------------------------------------
# Bautin ideal factorization at (-1/2, 1/2)


def bautin_polynomials(q12=None) -> dict:
    """p2, p4 and the matrix entries q_ij in Q[D, F].  ``q12`` overrides q12."""
    D, F = RationalPolynomial.variables()
    one = RationalPolynomial.const(1, 2)
    p2 = 10 * D**2 + 10 * D * F - D + 4 * F**2 - 5 * F + 1
    p4 = (
        1540 * D**4 + 4040 * D**3 * F + 1180 * D**3 + 4692 * D**2 * F**2 + 1992 * D**2 * F + 453 * D**2
        + 2768 * D * F**3 + 228 * D * F**2 + 318 * D * F - 2 * D + 784 * F**4 - 616 * F**3 - 63 * F**2
        - 154 * F + 49
    )
    q22 = (
        576 * F**3 + (2192 * D - 584) * F**2 + (2500 * D**2 + 812 * D - 135) * F
        + 1540 * D**3 + 1180 * D**2 + 453 * D - 2
    )
    return {
        "p2": p2,
        "p4": p4,
        "q11": one,
        "q12": q12 if q12 is not None else 10 * D - 1,
        "q21": 52 * F**2 + 44 * F + 49,
        "q22": q22,
        "u": (2 * F - 1) ** 2,
        "v": D + F,
    }


@dataclass(frozen=True)
class BautinCheck:
    ok: bool
    residual_p2: RationalPolynomial
    residual_p4: RationalPolynomial
    det_at_nu0: Fraction

    def __bool__(self):
        return self.ok


def verify_bautin_identity(q12=None) -> BautinCheck:
    """Exact check of (p2, p4) = Q ((2F-1)^2, D+F) and det Q(-1/2, 1/2) != 0.

    ``ok`` is true iff both residual polynomials are identically zero and the
    determinant is nonzero; the residuals are returned either way.
    """
    b = bautin_polynomials(q12)
    r2 = b["p2"] - (b["q11"] * b["u"] + b["q12"] * b["v"])
    r4 = b["p4"] - (b["q21"] * b["u"] + b["q22"] * b["v"])
    det = b["q11"] * b["q22"] - b["q21"] * b["q12"]
    d0 = det(Fraction(-1, 2), Fraction(1, 2))
    return BautinCheck(r2.is_zero() and r4.is_zero() and d0 != 0, r2, r4, d0)


# ---------------------------------------------------------------------------
# positivity of Phi


def _check_a(a, lo=0.0, hi=1.0, closed=False):
    a = float(a)
    ok = lo <= a <= hi if closed else lo < a < hi
    if not ok:
        raise DomainError(f"a must lie in {'[' if closed else '('}{lo}, {hi}{']' if closed else ')'}, got {a}")
    return a


def eval_F_appC(a: float, route: str = "gamma") -> float:
    """F(a) = Gamma(7/2 - a/2)^2 / (2^a sqrt(pi) Gamma(5/2 - a)).

    ``route="beta"`` evaluates the equivalent Beta-quotient form, which is
    singular at a = 1 and a = 1/2 (removable) and used as a cross-check.
    """
    if route == "gamma":
        a = _check_a(a, closed=True)
        return sf.gamma(3.5 - a / 2) ** 2 / (2.0**a * math.sqrt(math.pi) * sf.gamma(2.5 - a))
    if route == "beta":
        a = _check_a(a, 0.0, 1.0, closed=False) if a != 0 else 0.0
        if abs(a - 0.5) < 1e-3:
            # removable 0/0 at a = 1/2: symmetric Richardson from both sides
            return _sym_limit(_F_beta, 0.5)
        return _F_beta(a)
    raise DomainError(f"unknown route {route!r}")


def _F_beta(a):
    num = 3.0 / 16 * ((a - 1) * (a - 3) * (a - 5)) ** 2 / ((2 * a - 3) * (4 * a * a - 1))
    return num * sf.beta(1 - a, -1.5) / sf.beta(1 - a / 2, -0.5)


def _sym_limit(fn, a0, d=4e-3):
    g = [0.5 * (fn(a0 + e) + fn(a0 - e)) for e in (d, d / 2, d / 4)]
    r = [(4 * g[1] - g[0]) / 3, (4 * g[2] - g[1]) / 3]
    return (16 * r[1] - r[0]) / 15


def eval_Phi(a: float, b: float) -> float:
    """B(1-a,-3/2) 2F1(-3-a,-3/2;-1/2-a;-b) - 4 B(1-a/2,-1/2) 2F1(-1-a/2,-1/2;1/2-a/2;-b).

    Each Beta times 2F1 product is formed through the regularized 2F1, so the
    removable singularity at a = 1/2 is harmless.
    """
    a = _check_a(a)
    b = float(b)
    if not 0.0 <= b < 1.0:
        raise DomainError(f"b must lie in [0, 1), got {b}")
    t1 = sf.beta_hyp2f1(1 - a, -1.5, -3 - a, -b)
    t2 = sf.beta_hyp2f1(1 - a / 2, -0.5, -1 - a / 2, -b)
    return t1 - 4.0 * t2


def eval_rho_appC(n: int, a: float) -> float:
    """rho_n(a), so that the cubic Taylor polynomial of Phi in b is sum (-1)^n rho_n b^n.

    B(p,q)/(p+q)_n is written Gamma(p)Gamma(q)/Gamma(p+q+n), which stays finite
    where the Pochhammer denominator and B(1-a,-3/2) vanish together (a = 1/2).
    """
    if n not in (0, 1, 2, 3):
        raise DomainError(f"n must be in 0..3, got {n}")
    a = _check_a(a)
    fact = math.factorial(n)
    p1, q1 = 1 - a, -1.5
    p2, q2 = 1 - a / 2, -0.5
    t1 = sf.pochhammer(-3 - a, n) * sf.pochhammer(q1, n) / fact * sf.gamma(p1) * sf.gamma(q1) * sf.rgamma(p1 + q1 + n)
    t2 = sf.pochhammer(-1 - a / 2, n) * sf.pochhammer(q2, n) / fact * sf.gamma(p2) * sf.gamma(q2) * sf.rgamma(p2 + q2 + n)
    return t1 - 4.0 * t2


def eval_P_appC(a: float, b: float) -> float:
    return sum((-1) ** n * eval_rho_appC(n, a) * b**n for n in range(4))


def eval_g_appC(a: float) -> float:
    """The rational comparison function g(a) of the P(a, 1) factorization."""
    return (23 * a - 94) * (a - 1) * (a - 3) * (a - 4) * (a - 5) / (160 * (3 * a - 5) * (a + 2))


def _R_build() -> RationalPolynomial:
    a, t = RationalPolynomial.variables()
    return (
        -16384 * (2 * a - 1) * (8 * a**6 + 36 * a**5 - 126 * a**4 - 413 * a**3 + 429 * a**2 + 576 * a - 512)
        * (a + 3) ** 2 * (2 * a - 3) ** 2 * t**4
        + 3072 * (a - 1) * (a - 3) * (a - 5) * (2 * a - 3) * (a + 3)
        * (48 * a**8 + 252 * a**7 - 1904 * a**6 - 2305 * a**5 + 11568 * a**4
           - 2566 * a**3 - 14160 * a**2 - 2784 * a + 11520) * t**3
        - 24 * a * (a + 2)
        * (768 * a**9 - 7808 * a**8 + 3616 * a**7 + 135520 * a**6 - 221032 * a**5 - 557976 * a**4
           + 823685 * a**3 + 1082256 * a**2 - 894960 * a - 915840)
        * (a - 5) ** 2 * (a - 1) ** 2 * (a - 3) ** 2 * t**2
        - 4 * (a - 4) * (a + 2)
        * (320 * a**8 - 1400 * a**7 + 1830 * a**6 - 5491 * a**5 + 4678 * a**4 + 32889 * a**3
           - 4482 * a**2 - 47520 * a - 64800)
        * (a - 1) ** 3 * (a - 3) ** 3 * (a - 5) ** 4 * t
        + 15 * a * (a - 2) * (a - 4) * (a + 2) * (5 * a**4 - 15 * a**3 - 5 * a**2 + 27 * a + 36)
        * (a - 1) ** 4 * (a - 3) ** 5 * (a - 5) ** 6
    )


_R_CACHE = []


def R_polynomial() -> RationalPolynomial:
    """The bivariate polynomial R(a, t) in Q[a, t], built exactly."""
    if not _R_CACHE:
        _R_CACHE.append(_R_build())
    return _R_CACHE[0]


def eval_R(a, t) -> float:
    """R(a, t) in floating point (exact coefficients rounded once)."""
    R = R_polynomial()
    rows = [_horner([float(c) for c in row], t) for row in R.coeffs]
    return _horner(rows, a)


def discrim_b_from_rho(a: float) -> float:
    """Discriminant in b of P(a, b) = rho0 - rho1 b + rho2 b^2 - rho3 b^3."""
    r = [eval_rho_appC(n, a) for n in range(4)]
    return discriminant_cubic(-r[3], r[2], -r[1], r[0])


def discrim_b_from_R(a: float) -> float:
    """-2 (a+2) B(1-a/2,-1/2)^4 / (3 ((a-1)(a-3)(a-5))^8) R(a, F(a))."""
    a = _check_a(a)
    B = sf.beta(1 - a / 2, -0.5)
    return -2 * (a + 2) * B**4 / (3 * ((a - 1) * (a - 3) * (a - 5)) ** 8) * eval_R(a, eval_F_appC(a))


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class StageResult:
    stage: str
    verdict: bool
    witness: object
    tolerance: object
    precision: object
    elapsed_ms: float
    detail: dict = field(default_factory=dict)

    def to_dict(self, suite: str = "appendix-c") -> dict:
        return {
            "suite": suite,
            "stage": self.stage,
            "verdict": "pass" if self.verdict else "fail",
            "witness": _jsonable(self.witness),
            "tolerance": _jsonable(self.tolerance),
            "precision": _jsonable(self.precision),
            "elapsed_ms": round(self.elapsed_ms, 3),
            "detail": {k: _jsonable(v) for k, v in self.detail.items()},
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class PipelineReport:
    stages: list

    @property
    def ok(self) -> bool:
        return all(s.verdict for s in self.stages)

    def stage(self, name: str) -> StageResult:
        for s in self.stages:
            if s.stage == name:
                return s
        raise KeyError(name)

    def to_dicts(self) -> list:
        return [s.to_dict() for s in self.stages]


def _timed(fn):
    t0 = time.perf_counter()
    res = fn()
    res.elapsed_ms = 1e3 * (time.perf_counter() - t0)
    return res


def _stage_rho0(n=1000):
    aa = np.linspace(0, 1, n + 2)[1:-1]
    vals = np.array([eval_rho_appC(0, a) for a in aa])
    closed = np.array([
        8 * math.sqrt(math.pi) * (sf.gamma(1 - a / 2) * sf.rgamma(0.5 - a / 2)
                                  - (a + 0.5) / 6 * sf.gamma(1 - a) * sf.rgamma(0.5 - a))
        for a in aa
    ])
    k = int(np.argmin(vals))
    agree = float(np.max(np.abs(vals - closed) / np.maximum(1.0, np.abs(closed))))
    return StageResult("rho0_positive", bool(vals[k] > 0 and agree < 1e-12), float(aa[k]), 1e-12, "float64",
                       0.0, {"min_rho0": float(vals[k]), "closed_form_rel_err": agree, "points": n})


def _stage_sturm(name, forms, interval, probe, dps):
    res = interval_sturm_count(forms, interval, dps=dps)
    fine = interval_sturm_count(forms, interval, dps=max(80, dps))
    pos = _forms_value(forms, probe) > 0
    ok = res.count == 0 and fine.count == 0 and pos
    return StageResult(name, ok, [str(interval[0]), str(interval[1])], "exact (interval signs)", res.dps, 0.0,
                       {"roots": res.count, "roots_at_80_digits": fine.count, "positive_at": probe,
                        "chain_length": res.chain_length})


def _stage_tangents():
    l2, pi = math.log(2.0), math.pi
    F0, F1 = eval_F_appC(0.0), eval_F_appC(1.0)
    h0 = sf.digamma(3.5) - sf.digamma(2.5)
    h1 = sf.digamma(3.0) - sf.digamma(1.5)
    slope0, slope1 = -F0 * (h0 + l2), -F1 * (h1 + l2)

    def ell0(a):
        return 75 / 16 - (15 / 8 + 75 / 16 * l2) * a

    def ell1(a):
        return 4 / pi + 2 / pi * (1 - 6 * l2) * (a - 1)

    ahat = (75 * pi - 32 - 192 * l2) / ((75 * pi - 192) * l2 + 30 * pi + 32)
    errs = {
        "ell0_value": abs(ell0(0) - F0),
        "ell0_slope": abs(-(15 / 8 + 75 / 16 * l2) - slope0),
        "ell1_value": abs(ell1(1) - F1),
        "ell1_slope": abs(2 / pi * (1 - 6 * l2) - slope1),
        "crossing": abs(ell0(ahat) - ell1(ahat)),
    }
    worst = 0.0
    for a in np.linspace(0.01, 0.99, 50):
        den = 160 * (2 + a) * (5 - 3 * a)
        worst = max(worst, abs(ell0(a) - eval_g_appC(a) - _forms_value(P0_COEFFS, a) / den),
                    abs(ell1(a) - eval_g_appC(a) - _forms_value(P1_COEFFS, a) / (pi * den)))
    errs["p_forms"] = worst
    ok = all(v < 1e-12 for v in errs.values()) and 0.44 < ahat < 0.46
    return StageResult("tangent_lines", ok, ahat, 1e-12, "float64", 0.0, {"ahat": ahat, **errs})


def _stage_P_at_one(n=1000):
    aa = np.linspace(0, 1, n + 2)[1:-1]
    worst, wa, minP = 0.0, None, math.inf
    for a in aa:
        P1 = eval_P_appC(a, 1.0)
        fac = 40 * a * (a + 2) * (3 * a - 5) / ((a - 1) * (a - 3) * (a - 5)) ** 2 * sf.beta(1 - a / 2, -0.5)
        alt = fac * (eval_F_appC(a) - eval_g_appC(a))
        err = abs(P1 - alt) / max(1.0, abs(P1))
        worst = max(worst, err)
        if P1 < minP:
            minP, wa = P1, a
    return StageResult("P_at_one", bool(minP > 0 and worst < 1e-10), float(wa), 1e-10, "float64", 0.0,
                       {"min_P_a_1": minP, "factorization_rel_err": worst, "points": n})


def _stage_R(n=1000):
    aa = np.linspace(0, 1, n + 2)[1:-1]
    vals = np.array([eval_R(a, eval_F_appC(a)) for a in aa])
    scale = np.array([abs(eval_R(a, 0.0)) + 1.0 for a in aa])
    rel = np.abs(vals) / scale
    k = int(np.argmin(rel))
    same_sign = bool(np.all(vals > 0) or np.all(vals < 0))
    return StageResult("R_nonzero", bool(same_sign and rel[k] > 1e-10), float(aa[k]), 1e-10, "float64", 0.0,
                       {"min_relative_R": float(rel[k]), "sign": int(np.sign(vals[0])), "points": n})


def _stage_R_crosscheck(m=20, seed=0):
    rng = np.random.default_rng(seed)
    aa = rng.uniform(0.02, 0.98, m)
    worst, wa = 0.0, None
    for a in aa:
        d1, d2 = discrim_b_from_rho(a), discrim_b_from_R(a)
        err = abs(d1 - d2) / max(abs(d1), abs(d2))
        if err >= worst:
            worst, wa = err, float(a)
    return StageResult("R_transcription", worst < 1e-8, wa, 1e-8, "float64", 0.0,
                       {"max_rel_diff": worst, "samples": m, "seed": seed})


def _stage_constant():
    l2, pi = math.log(2.0), math.pi
    c_closed = (0.4 + l2) ** 2 + 27 / 8 - 5 * pi**2 / 12
    h0 = sf.digamma(3.5) - sf.digamma(2.5)
    hp1 = -0.5 * sf.trigamma(3.0) + sf.trigamma(1.5)
    c_num = (h0 + l2) ** 2 - hp1
    ok = abs(c_closed - 0.46) <= 0.01 and abs(c_closed - c_num) < 1e-12 and c_closed > 0
    return StageResult("convexity_constant", ok, c_closed, 0.01, "float64", 0.0,
                       {"closed": c_closed, "digamma_route": c_num})


def _stage_phi(n=101, eps=1e-3):
    g = np.linspace(eps, 1 - eps, n)
    best, wit = math.inf, None
    below = 0
    for a in g:
        for b in g:
            v = eval_Phi(a, b)
            if v < best:
                best, wit = v, (float(a), float(b))
    for a in g[::10]:
        for b in g[::10]:
            if eval_Phi(a, b) < eval_P_appC(a, b) - 1e-12:
                below += 1
    return StageResult("Phi_grid", bool(best > 0 and below == 0), list(wit), 0.0, "float64", 0.0,
                       {"min_Phi": best, "grid": n, "Phi_below_P": below})


def verify_appC_pipeline(dps: int = 60, points: int = 1000, phi_grid: int = 101, seed: int = 0) -> PipelineReport:
    """Run every positivity stage for Phi and collect verdicts with witnesses."""
    stages = [
        _timed(lambda: _stage_rho0(points)),
        _timed(lambda: _stage_sturm("p0_sturm", P0_COEFFS, (Fraction(0), Fraction(23, 50)), 0.25, dps)),
        _timed(lambda: _stage_sturm("p1_sturm", P1_COEFFS, (Fraction(11, 25), Fraction(1)), 0.75, dps)),
        _timed(_stage_tangents),
        _timed(lambda: _stage_P_at_one(points)),
        _timed(_stage_constant),
        _timed(lambda: _stage_R(points)),
        _timed(lambda: _stage_R_crosscheck(20, seed)),
        _timed(lambda: _stage_phi(phi_grid)),
    ]
    return PipelineReport(stages)
