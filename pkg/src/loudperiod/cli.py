"""Command-line front end.

Exit codes: 0 success, 1 a verification assertion failed (or every period row
failed), 2 usage or domain error.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys

import click
import numpy as np

from .core import RegionTag, annulus_anchor, classify_region
from .critical import solve_G
from .errors import DomainError, LoudError, UnsupportedCaseError
from .expansion import build_model, eval_model, gamma1_coeffs, gamma2_coeffs, gamma3_coeffs
from .flow import IntegratorConfig, half_period_detail, period_derivatives
from .suites import SUITES, run_suite

COEFF_COLUMNS = ("name", "value", "status", "reason")
PERIOD_COLUMNS = ("s", "s_phys", "P", "P1", "P2", "model_P", "residual", "steps", "error")
SCAN_COLUMNS = ("F", "D", "residual")
VERIFY_COLUMNS = ("suite", "stage", "verdict", "witness", "tolerance", "elapsed_ms")

ZERO_TOL = 1e-12


def fmt(x, human: bool = False) -> str:
    """17 significant digits in machine mode, 6 in human mode; blanks for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}" if human else f"{float(x):.17g}"
    return str(x)


def _round_json(v, human):
    if isinstance(v, float) and math.isfinite(v) and human:
        return float(f"{v:.6g}")
    if isinstance(v, list):
        return [_round_json(x, human) for x in v]
    if isinstance(v, dict):
        return {k: _round_json(x, human) for k, x in v.items()}
    return v


def _write_csv(rows, columns, out, human):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c), human) for c in columns])
    out.write(buf.getvalue())


def _emit(rows, columns, fmt_name, output, human):
    if fmt_name == "json":
        text = json.dumps([_round_json({c: r.get(c) for c in columns}, human) for r in rows], indent=1) + "\n"
        _open(output).write(text)
    else:
        _write_csv(rows, columns, _open(output), human)


_handles = {}


def _open(path):
    if path in (None, "-"):
        return sys.stdout
    if path not in _handles:
        _handles[path] = open(path, "w", newline="")
    return _handles[path]


def _close_all():
    for h in _handles.values():
        h.close()
    _handles.clear()


def region_violation(D: float, F: float) -> str:
    """Name the chart conditions that (D, F) violates."""
    v = [c for c, ok in (("-1<D", D > -1), ("D<0", D < 0), ("0<F", F > 0), ("F<1", F < 1)) if not ok]
    w = [c for c, ok in (("F>1", F > 1), ("D<0", D < 0), ("F+D>0", F + D > 0)) if not ok]
    return (f"(D={D:g}, F={F:g}) lies on no chart: V needs -1<D<0, 0<F<1 (violated: {', '.join(v)}); "
            f"W needs F>1, D<0, F+D>0 (violated: {', '.join(w)}); F=1 needs -1<D<0")


def _fail(msg, code=2):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def coeff_rows(D: float, F: float, strict: bool = False) -> tuple[list, str]:
    """Rows of the coefficient table and the expansion case label (library call behind `coeff`)."""
    tag = classify_region((D, F))
    if F == 1.0 and -1.0 < D < 0.0:
        cs = gamma3_coeffs(D)
    elif -1.0 < D < 0.0 and 0.0 < F < 1.0:
        cs = gamma1_coeffs((D, F), strict=strict)
    elif F > 1.0 and D < 0.0 and F + D > 0.0:
        cs = gamma2_coeffs((D, F), strict=strict)
    else:
        extra = " (an isochrone outside every chart)" if tag is RegionTag.Isochrone else ""
        raise DomainError(region_violation(D, F) + extra)
    try:
        model = build_model((D, F))
    except UnsupportedCaseError:
        model = None
    present = cs.present()
    reasons = dict(cs.absent())
    case = ""
    if model is not None:
        case = model.case_label
        for t in model.terms:
            if t.name not in present and t.coeff is not None:
                present[t.name] = t.coeff
        reasons.update(model.reasons)
    scale = max(1.0, abs(present.get("T00", present.get("T0", 1.0))))
    rows = []
    for name, val in present.items():
        status = "zero" if abs(val) <= ZERO_TOL * scale else "ok"
        rows.append({"name": name, "value": val, "status": status, "reason": ""})
    for name, why in reasons.items():
        if name not in present:
            rows.append({"name": name, "value": None, "status": "absent", "reason": why})
    if cs.lam is not None:
        rows.append({"name": "lambda", "value": cs.lam, "status": "ok", "reason": ""})
    return rows, case


def period_rows(D: float, F: float, svals, cfg: IntegratorConfig, derivatives: bool) -> list:
    """One row per normalized s (library call behind `period`)."""
    nu = (D, F)
    xi = annulus_anchor(nu)
    try:
        model = build_model(nu)
        if not model.complete:
            model = None
    except (UnsupportedCaseError, DomainError):
        model = None
    rows = []
    for s in svals:
        row = {"s": s, "s_phys": s * xi}
        try:
            if not 0.0 < s < 1.0:
                raise DomainError(f"normalized s must lie in (0,1); got {s}")
            det = half_period_detail(s * xi, nu, cfg)
            row["P"] = 2.0 * det.T
            row["steps"] = det.steps
            if derivatives:
                ps = period_derivatives(s * xi, nu, cfg)
                row["P1"], row["P2"] = ps.P1, ps.P2
            if model is not None:
                row["model_P"] = 2.0 * eval_model(model, s * xi)
                row["residual"] = row["P"] - row["model_P"]
        except LoudError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def scan_rows(F_min: float, F_max: float, n: int) -> list:
    rows = []
    for F in np.linspace(F_min, F_max, n):
        p = solve_G(float(F))
        rows.append({"F": p.F, "D": p.D, "residual": p.residual})
    return rows


_format = click.option("--format", "fmt_name", type=click.Choice(["csv", "json"]), default="csv",
                       show_default=True, help="Output format.")
_human = click.option("--human", is_flag=True, help="Six significant digits instead of seventeen.")
_output = click.option("-o", "--output", default="-", show_default=True, help="Output file ('-' for stdout).")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def main():
    """Period function of Loud quadratic centers near the outer boundary."""


@main.command()
@click.option("-D", "D", type=float, required=True)
@click.option("-F", "F", type=float, required=True)
@click.option("--strict", is_flag=True, help="Fail on pole coefficients instead of listing them as absent.")
@_format
@_human
@_output
def coeff(D, F, strict, fmt_name, human, output):
    """Closed-form expansion coefficients at nu = (D, F), zero rows flagged."""
    try:
        rows, case = coeff_rows(D, F, strict)
    except LoudError as exc:
        _fail(str(exc))
    if case:
        rows.append({"name": "case", "value": None, "status": case, "reason": ""})
    _emit(rows, COEFF_COLUMNS, fmt_name, output, human)
    _close_all()


@main.command()
@click.option("-D", "D", type=float, required=True)
@click.option("-F", "F", type=float, required=True)
@click.option("-s", "svals", type=float, multiple=True, help="Normalized section coordinate; repeatable.")
@click.option("--derivatives", is_flag=True, help="Also report P' and P'' by finite differences.")
@click.option("--rel-tol", type=float, default=1e-10, show_default=True)
@click.option("--abs-tol", type=float, default=1e-12, show_default=True)
@_format
@_human
@_output
def period(D, F, svals, derivatives, rel_tol, abs_tol, fmt_name, human, output):
    """Period P(s) = 2 T(s) with the expansion prediction when a model exists."""
    if not svals:
        raise click.UsageError("give at least one -s value")
    try:
        cfg = IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol)
        annulus_anchor((D, F))
    except LoudError as exc:
        _fail(str(exc))
    rows = period_rows(D, F, svals, cfg, derivatives)
    _emit(rows, PERIOD_COLUMNS, fmt_name, output, human)
    _close_all()
    if not any("error" not in r for r in rows):
        sys.exit(1)


@main.command("scan-gf")
@click.option("--F-min", "F_min", type=float, default=1.01, show_default=True)
@click.option("--F-max", "F_max", type=float, default=1.49, show_default=True)
@click.option("-n", type=click.IntRange(min=1), default=25, show_default=True)
@_format
@_human
@_output
def scan_gf(F_min, F_max, n, fmt_name, human, output):
    """Points (F, G(F)) of the curve where T10 vanishes."""
    try:
        rows = scan_rows(F_min, F_max, n)
    except LoudError as exc:
        _fail(str(exc))
    _emit(rows, SCAN_COLUMNS, fmt_name, output, human)
    _close_all()


@main.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for every randomized check.")
@click.option("--format", "fmt_name", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@_human
@_output
def verify(suite, seed, fmt_name, human, output):
    """Run a verification suite; exit 0 iff every check passes."""
    checks = run_suite(suite, seed=seed)
    recs = [c.to_dict() for c in checks]
    if fmt_name == "json":
        _open(output).write(json.dumps(_round_json(recs, human), indent=1) + "\n")
    else:
        flat = [{k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()} for r in recs]
        _write_csv(flat, VERIFY_COLUMNS, _open(output), human)
    _close_all()
    failed = [r for r in recs if r["verdict"] != "pass"]
    for r in failed:
        click.echo(f"FAIL {r['suite']}/{r['stage']} witness={r['witness']}", err=True)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
