import csv
import io
import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest
from click.testing import CliRunner

from loudperiod import cli
from loudperiod.flow import IntegratorConfig
from loudperiod.suites import Check

SCHEMA = json.loads(resources.files("loudperiod").joinpath("schemas/report.schema.json").read_text())


def run(*args):
    return CliRunner().invoke(cli.main, [str(a) for a in args])


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_coeff_flags_T01_zero_on_F2():
    r = run("coeff", "-D", -0.5, "-F", 2)
    assert r.exit_code == 0
    rows = {x["name"]: x for x in rows_of(r.output)}
    assert rows["T01"]["status"] == "zero"
    assert list(rows_of(r.output)[0].keys()) == list(cli.COEFF_COLUMNS)


def test_coeff_flags_T10_zero_on_D_minus_one():
    r = run("coeff", "-D", -1, "-F", 1.25)
    rows = {x["name"]: x for x in rows_of(r.output)}
    assert rows["T10"]["status"] == "zero"
    assert rows["case"]["status"] == "G2c"


def test_coeff_outside_charts_exits_2():
    r = run("coeff", "-D", 0.5, "-F", 3)
    assert r.exit_code == 2
    assert "D<0" in r.output


def test_coeff_absent_pole_and_strict():
    r = run("coeff", "-D", -0.4, "-F", 2 / 3)
    rows = {x["name"]: x for x in rows_of(r.output)}
    assert rows["T01"]["status"] == "absent" and "pole" in rows["T01"]["reason"]
    assert run("coeff", "-D", -0.4, "-F", 2 / 3, "--strict").exit_code == 2


def test_coeff_byte_identical_to_library():
    r = run("coeff", "-D", -1.2, "-F", 1.4)
    rows, case = cli.coeff_rows(-1.2, 1.4)
    rows.append({"name": "case", "value": None, "status": case, "reason": ""})
    buf = io.StringIO()
    cli._write_csv(rows, cli.COEFF_COLUMNS, buf, False)
    assert r.output == buf.getvalue()


def test_coeff_json_and_human():
    r = run("coeff", "-D", -0.5, "-F", 0.75, "--format", "json", "--human")
    data = json.loads(r.output)
    t20 = next(x for x in data if x["name"] == "T20")
    assert t20["value"] == 5.94895


def test_period_isochrone():
    r = run("period", "-D", -0.5, "-F", 2, *sum((["-s", s] for s in (0.1, 0.5, 0.9)), []))
    assert r.exit_code == 0
    rows = rows_of(r.output)
    assert list(rows[0].keys()) == list(cli.PERIOD_COLUMNS)
    assert all(abs(float(x["P"]) - 2 * math.pi) < 1e-7 for x in rows)


def test_period_residual_decays():
    ss = 0.04 * 2.0 ** -np.arange(5)
    args = sum((["-s", s] for s in ss), [])
    r = run("period", "-D", -0.5, "-F", 0.75, "--rel-tol", 1e-13, "--abs-tol", 1e-15, *args)
    res = [abs(float(x["residual"])) for x in rows_of(r.output)]
    assert all(b < a / 4 for a, b in zip(res, res[1:]))


def test_period_byte_identical_to_library():
    r = run("period", "-D", -0.9, "-F", 1.1, "-s", 0.1, "-s", 0.3, "--derivatives")
    rows = cli.period_rows(-0.9, 1.1, [0.1, 0.3], IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12), True)
    buf = io.StringIO()
    cli._write_csv(rows, cli.PERIOD_COLUMNS, buf, False)
    assert r.output == buf.getvalue()


def test_period_row_errors_and_exit_codes():
    r = run("period", "-D", -0.5, "-F", 0.75, "-s", 0.5, "-s", 1.5)
    assert r.exit_code == 0
    rows = rows_of(r.output)
    assert rows[0]["error"] == "" and rows[1]["error"].startswith("DomainError")
    assert run("period", "-D", -0.5, "-F", 0.75, "-s", 1.5).exit_code == 1
    assert run("period", "-D", -0.5, "-F", 0.75).exit_code == 2
    assert run("period", "-D", 0.5, "-F", 3, "-s", 0.5).exit_code == 2


def test_unknown_flag_rejected():
    assert run("coeff", "-D", -0.5, "-F", 0.75, "--bogus").exit_code == 2


def test_scan_gf_matches_library():
    r = run("scan-gf", "--F-min", 1.1, "--F-max", 1.4, "-n", 4)
    assert r.exit_code == 0
    buf = io.StringIO()
    cli._write_csv(cli.scan_rows(1.1, 1.4, 4), cli.SCAN_COLUMNS, buf, False)
    assert r.output == buf.getvalue()
    rows = rows_of(r.output)
    assert all(-float(x["F"]) < float(x["D"]) < -0.5 for x in rows)
    assert run("scan-gf", "--F-min", 0.9).exit_code == 2


def test_verify_bautin_json_schema():
    r = run("verify", "bautin")
    assert r.exit_code == 0
    data = json.loads(r.output)
    jsonschema.validate(data, SCHEMA)
    assert all(x["verdict"] == "pass" for x in data)


def test_verify_nu_star():
    r = run("verify", "nu-star")
    assert r.exit_code == 0
    data = json.loads(r.output)
    jsonschema.validate(data, SCHEMA)
    text = json.dumps(data)
    assert "-1.12791861" in text


def test_verify_positivity_suite_sturm_stages():
    r = run("verify", "appendix-c")
    assert r.exit_code == 0
    data = json.loads(r.output)
    jsonschema.validate(data, SCHEMA)
    st = {x["stage"]: x for x in data}
    assert st["p0_sturm"]["verdict"] == "pass" and st["p1_sturm"]["verdict"] == "pass"
    assert st["p0_sturm"]["detail"]["roots"] == 0


def test_verify_csv_header():
    r = run("verify", "isochrones", "--format", "csv")
    assert r.exit_code == 0
    assert list(rows_of(r.output)[0].keys()) == list(cli.VERIFY_COLUMNS)


def test_verify_failure_exits_1(monkeypatch):
    def broken(name, seed=0):
        return [Check("bautin", "forced", False, [1, 2], 0.0, 0.0)]

    monkeypatch.setattr(cli, "run_suite", broken)
    r = run("verify", "bautin")
    assert r.exit_code == 1
    assert "FAIL bautin/forced" in r.output


def test_output_file(tmp_path):
    out = tmp_path / "c.csv"
    r = run("coeff", "-D", -0.5, "-F", 0.75, "-o", out)
    assert r.exit_code == 0 and r.output == ""
    assert out.read_text().startswith(",".join(cli.COEFF_COLUMNS))


@pytest.mark.parametrize("x,human,text", [
    (1 / 3, False, "0.33333333333333331"),
    (1 / 3, True, "0.333333"),
    (None, False, ""),
    (3, False, "3"),
    (True, False, "true"),
])
def test_fmt(x, human, text):
    assert cli.fmt(x, human) == text
