"""Numerical half-periods of the Loud centers.

Orbits start on the positive x-axis at (xi - s_phys, 0), where xi is the annulus
anchor, and are integrated with an embedded Dormand-Prince 5(4) pair until they
return to y = 0 on the negative x-axis.  By the reversibility (x, y, t) ->
(x, -y, -t) the full period is exactly twice that time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from numba import njit

from .core import Parameter, _as_param, annulus_anchor
from .errors import DomainError, EscapeError, StepLimitError

__all__ = [
    "IntegratorConfig",
    "PeriodSample",
    "HalfPeriodResult",
    "half_period",
    "half_period_physical",
    "half_period_detail",
    "period_derivatives",
    "full_loop",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets for a single orbit integration.

    ``event_tol`` bounds |y| at the located crossing relative to max(1, |x|).
    ``box`` is the escape tripwire on |x| and |y|; periodic orbits near the
    outer boundary reach |x| of order s^(-lambda), so it is set far above the
    values those orbits need.  ``s_floor`` is the smallest admissible physical
    offset as a fraction of the anchor.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10_000_000
    event_tol: float = 1e-12
    box: float = 1e100
    s_floor: float = 1e-4

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "event_tol", "box", "s_floor"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.max_steps <= 0:
            raise DomainError("max_steps must be positive")


@dataclass(frozen=True)
class HalfPeriodResult:
    T: float
    steps: int
    rejected: int
    err_est: float
    x_return: float


@dataclass(frozen=True)
class PeriodSample:
    """Period and its first two derivatives in the physical offset s."""

    s: float
    P: float
    P1: float
    P2: float
    diagnostics: dict = field(default_factory=dict)


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_OK, _ESCAPED, _STEP_LIMIT, _BAD_START = 0, 1, 2, 3


@njit(cache=True)
def _dp_step(D, F, x, y, fx, fy, h):
    x2 = x + h * _A21 * fx
    y2 = y + h * _A21 * fy
    k2x = -y2 * (1.0 - x2)
    k2y = x2 + D * x2 * x2 + F * y2 * y2
    x3 = x + h * (_A31 * fx + _A32 * k2x)
    y3 = y + h * (_A31 * fy + _A32 * k2y)
    k3x = -y3 * (1.0 - x3)
    k3y = x3 + D * x3 * x3 + F * y3 * y3
    x4 = x + h * (_A41 * fx + _A42 * k2x + _A43 * k3x)
    y4 = y + h * (_A41 * fy + _A42 * k2y + _A43 * k3y)
    k4x = -y4 * (1.0 - x4)
    k4y = x4 + D * x4 * x4 + F * y4 * y4
    x5 = x + h * (_A51 * fx + _A52 * k2x + _A53 * k3x + _A54 * k4x)
    y5 = y + h * (_A51 * fy + _A52 * k2y + _A53 * k3y + _A54 * k4y)
    k5x = -y5 * (1.0 - x5)
    k5y = x5 + D * x5 * x5 + F * y5 * y5
    x6 = x + h * (_A61 * fx + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
    y6 = y + h * (_A61 * fy + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
    k6x = -y6 * (1.0 - x6)
    k6y = x6 + D * x6 * x6 + F * y6 * y6
    xn = x + h * (_A71 * fx + _A73 * k3x + _A74 * k4x + _A75 * k5x + _A76 * k6x)
    yn = y + h * (_A71 * fy + _A73 * k3y + _A74 * k4y + _A75 * k5y + _A76 * k6y)
    k7x = -yn * (1.0 - xn)
    k7y = xn + D * xn * xn + F * yn * yn
    ex = h * (_E1 * fx + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
    ey = h * (_E1 * fy + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
    return xn, yn, ex, ey, k7x, k7y


@njit(cache=True)
def _locate_crossing(D, F, x, y, fx, fy, h, yn, fyn, event_tol):
    """Root tau in (0, h] of the y-component of a DP step of size tau.

    Starts from the cubic Hermite guess, then Illinois regula falsi on the
    bracket [0, h].  Every trial is a genuine DP step, so the located point
    carries the same local accuracy as the integration itself.
    """
    lo, glo = 0.0, y
    hi, ghi = h, yn
    # Hermite cubic in theta for y(theta*h); solve by a few Newton steps
    th = y / (y - yn)
    for _ in range(8):
        t2 = th * th
        t3 = t2 * th
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + th
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        p = h00 * y + h10 * h * fy + h01 * yn + h11 * h * fyn
        dp = (6 * t2 - 6 * th) * y + (3 * t2 - 4 * th + 1) * h * fy
        dp += (-6 * t2 + 6 * th) * yn + (3 * t2 - 2 * th) * h * fyn
        if dp == 0.0:
            break
        nth = th - p / dp
        if not (0.0 < nth < 1.0):
            break
        th = nth
    tau = th * h
    side = 0
    xt, yt = x, y
    for _ in range(200):
        if not (lo < tau < hi):
            tau = 0.5 * (lo + hi)
        xt, yt, _ex, _ey, _kx, _ky = _dp_step(D, F, x, y, fx, fy, tau)
        if abs(yt) <= event_tol * max(1.0, abs(xt)):
            break
        if yt > 0.0:
            lo, glo = tau, yt
            if side == 1:
                ghi *= 0.5
            side = 1
        else:
            hi, ghi = tau, yt
            if side == -1:
                glo *= 0.5
            side = -1
        if hi - lo <= 4e-16 * hi:
            break
        tau = lo + (hi - lo) * glo / (glo - ghi)
    return tau, xt, yt


@njit(cache=True)
def _half_period_kernel(D, F, x0, rtol, atol, max_steps, event_tol, box):
    x = x0
    y = 0.0
    fx = 0.0
    fy = x0 + D * x0 * x0
    if not fy > 0.0:
        return _BAD_START, 0.0, 0, 0, 0.0, x
    # Kahan-compensated time accumulator
    t = 0.0
    tc = 0.0
    h = 1e-3
    facold = 1e-4
    steps = 0
    rejected = 0
    errsum = 0.0
    left_axis = False
    last_rejected = False
    while steps < max_steps:
        steps += 1
        xn, yn, ex, ey, kx, ky = _dp_step(D, F, x, y, fx, fy, h)
        skx = atol + rtol * max(abs(x), abs(xn))
        sky = atol + rtol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / skx) ** 2 + (ey / sky) ** 2))
        if not math.isfinite(err):
            err = 1e10
        if err <= 1.0:
            if left_axis and yn <= 0.0:
                tau, xt, yt = _locate_crossing(D, F, x, y, fx, fy, h, yn, ky, event_tol)
                errsum += err
                yy = tau - tc
                tt = t + yy
                tc = (tt - t) - yy
                t = tt
                return _OK, t, steps, rejected, errsum * rtol, xt
            if yn > 0.0:
                left_axis = True
            errsum += err
            yy = h - tc
            tt = t + yy
            tc = (tt - t) - yy
            t = tt
            x, y, fx, fy = xn, yn, kx, ky
            if abs(x) > box or abs(y) > box:
                return _ESCAPED, t, steps, rejected, errsum * rtol, x
            e = max(err, 1e-10)
            fac = 0.9 * e ** (-0.17) * facold ** 0.04
            fac = min(max(fac, 0.2), 10.0)
            if last_rejected:
                fac = min(fac, 1.0)
            facold = max(err, 1e-4)
            h = h * fac
            last_rejected = False
        else:
            rejected += 1
            h = h * max(0.2, 0.9 * err ** (-0.2))
            last_rejected = True
    return _STEP_LIMIT, t, steps, rejected, errsum * rtol, x


def _run(x0: float, nu: Parameter, cfg: IntegratorConfig) -> HalfPeriodResult:
    status, T, steps, rejected, err_est, xr = _half_period_kernel(
        nu.D, nu.F, float(x0), cfg.rel_tol, cfg.abs_tol, int(cfg.max_steps), cfg.event_tol, cfg.box
    )
    if status == _ESCAPED:
        raise EscapeError(
            f"trajectory from x0={x0!r} left the box |x|,|y|<{cfg.box:g} at t={T:.6g} "
            f"without returning to y=0 (D={nu.D}, F={nu.F})"
        )
    if status == _STEP_LIMIT:
        raise StepLimitError(f"step budget {cfg.max_steps} exhausted at t={T:.6g}")
    if status == _BAD_START:
        raise DomainError(f"start point ({x0!r}, 0) does not move into y>0")
    return HalfPeriodResult(T, int(steps), int(rejected), float(err_est), float(xr))


def _check_offset(s_phys: float, xi: float, cfg: IntegratorConfig) -> None:
    if not (0.0 < s_phys < xi):
        raise DomainError(f"physical offset must lie in (0, {xi}); got {s_phys}")
    if s_phys < cfg.s_floor * xi * (1.0 - 1e-12):
        raise DomainError(
            f"offset {s_phys:g} is below the near-polycycle floor {cfg.s_floor:g}*xi"
        )


def half_period_detail(s_phys: float, nu, cfg: IntegratorConfig | None = None) -> HalfPeriodResult:
    """Half-period with integrator diagnostics, physical offset from the anchor."""
    cfg = cfg or IntegratorConfig()
    nu = _as_param(nu)
    xi = annulus_anchor(nu)
    _check_offset(s_phys, xi, cfg)
    return _run(xi - s_phys, nu, cfg)


def half_period_physical(s_phys: float, nu, cfg: IntegratorConfig | None = None) -> float:
    """Half-period T(s) for the orbit through (xi - s_phys, 0)."""
    return half_period_detail(s_phys, nu, cfg).T


def half_period(s: float, nu, cfg: IntegratorConfig | None = None) -> float:
    """Half-period for the normalized section coordinate s in (0, 1).

    The orbit starts at ((1 - s) xi, 0): s -> 0 is the outer boundary and
    s -> 1 the center.
    """
    nu = _as_param(nu)
    if not (0.0 < s < 1.0):
        raise DomainError(f"normalized s must lie in (0,1); got {s}")
    xi = annulus_anchor(nu)
    return half_period_physical(s * xi, nu, cfg)


def period_derivatives(s_phys: float, nu, cfg: IntegratorConfig | None = None) -> PeriodSample:
    """P = 2T and its first two s-derivatives by Richardson-extrapolated central differences.

    Step h = max(1e-6, 1e-3 s_phys); P is evaluated at s, s +- h and s +- 2h.
    """
    cfg = cfg or IntegratorConfig()
    nu = _as_param(nu)
    xi = annulus_anchor(nu)
    _check_offset(s_phys, xi, cfg)
    h = max(1e-6, 1e-3 * s_phys)
    if not (s_phys - 2 * h > 0.0 and s_phys + 2 * h < xi):
        raise DomainError(f"offset {s_phys} too close to the ends for step {h}")
    res = {k: _run(xi - (s_phys + k * h), nu, cfg) for k in (-2, -1, 0, 1, 2)}
    P = {k: 2.0 * r.T for k, r in res.items()}
    d1h = (P[1] - P[-1]) / (2 * h)
    d1H = (P[2] - P[-2]) / (4 * h)
    d2h = (P[1] - 2 * P[0] + P[-1]) / (h * h)
    d2H = (P[2] - 2 * P[0] + P[-2]) / (4 * h * h)
    P1 = (4 * d1h - d1H) / 3
    P2 = (4 * d2h - d2H) / 3
    # the summed local-error bound is far too pessimistic for the period, so the
    # noise level of P comes from one re-run at a ten times tighter tolerance
    tight = IntegratorConfig(
        rel_tol=cfg.rel_tol / 10, abs_tol=cfg.abs_tol / 10, max_steps=cfg.max_steps,
        event_tol=cfg.event_tol, box=cfg.box, s_floor=cfg.s_floor,
    )
    P_tight = 2.0 * _run(xi - s_phys, nu, tight).T
    eps_P = 2.0 * max(abs(P_tight - P[0]), 4e-16 * abs(P[0]))
    err1 = abs(d1h - d1H) / 3 + 1.5 * eps_P / h
    err2 = abs(d2h - d2H) / 3 + 6.0 * eps_P / (h * h)
    diag = {
        "h": h,
        "steps": sum(r.steps for r in res.values()),
        "err_P": eps_P,
        "err_P_bound": 2.0 * max(r.err_est for r in res.values()),
        "err_P1": err1,
        "err_P2": err2,
    }
    return PeriodSample(s_phys, P[0], P1, P2, diag)


def full_loop(s_phys: float, nu, cfg: IntegratorConfig | None = None) -> tuple[float, float, float]:
    """Integrate a whole loop from (xi - s_phys, 0) and return (period, x_end, y_end).

    Used to check reversibility: the loop should close on the start point and
    its period should be twice the half-period.
    """
    from scipy.integrate import solve_ivp

    cfg = cfg or IntegratorConfig()
    nu = _as_param(nu)
    xi = annulus_anchor(nu)
    _check_offset(s_phys, xi, cfg)
    x0 = xi - s_phys
    D, F = nu.D, nu.F

    def rhs(t, u):
        x, y = u
        return [-y * (1.0 - x), x + D * x * x + F * y * y]

    def back_to_start(t, u):
        return u[1]

    back_to_start.direction = 1.0
    half = half_period_detail(s_phys, nu, cfg).T
    # integrate past the far crossing; the next upward crossing of y=0 closes the loop
    sol = solve_ivp(
        rhs,
        (0.0, 4.0 * half),
        [x0, 0.0],
        method="DOP853",
        rtol=max(cfg.rel_tol, 2.3e-14),
        atol=cfg.abs_tol,
        events=back_to_start,
    )
    ts = [t for t in sol.t_events[0] if t > 0.5 * half]
    if not ts:
        raise EscapeError("loop did not close within twice the expected period")
    k = list(sol.t_events[0]).index(ts[0])
    xe, ye = sol.y_events[0][k]
    return float(ts[0]), float(xe), float(ye)
