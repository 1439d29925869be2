from __future__ import annotations

import json
from importlib import resources

import pytest

from twocyc import __version__, reports
from twocyc.cli import main

P16 = str(resources.files("twocyc").joinpath("data/P16.poly"))


@pytest.fixture
def cold_tables(monkeypatch):
    """Fresh table cache, so budgeted runs really do their Groebner work."""
    from twocyc import stability

    monkeypatch.setattr(stability, "_TABLES", {})


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    report = json.loads(out)
    reports.validate(report)
    return code, report


def test_constants_v9(capsys):
    code, rep = run_json(capsys, "constants", "--d", "9", "--kmax", "9")
    assert code == 0
    assert "242/17 * a2 * a3 * a6" in rep["result"]["V"]["9"]
    # in the degree-5 ring the a6..a9 terms are absent
    code, rep = run_json(capsys, "constants", "--d", "5", "--kmax", "9")
    assert rep["result"]["V"]["9"] == "-121/17 * a2 * a4 * a5 + 69/17 * a5^2"
    assert rep["version"] == __version__
    assert rep["inputs"]["d"] == 5 and rep["budget"] > 0


def test_budget_does_not_leak_between_runs(capsys, monkeypatch, cold_tables):
    monkeypatch.setenv("TWOCYC_BUDGET", "1e-7")
    # a starved run leaves partially extended bases in the shared table cache
    assert run(capsys, "constants", "--d", "6", "--kmax", "15")[0] == 2
    monkeypatch.delenv("TWOCYC_BUDGET")
    code, rep = run_json(capsys, "member", "--d", "6", "--ideal", "V3-11", "--poly", "W15")
    assert code == 0 and rep["result"]["power"] == 2


def test_constants_d2_only_w3_w4(capsys):
    code, rep = run_json(capsys, "constants", "--d", "2")
    assert code == 0 and set(rep["result"]["W"]) == {"3", "4"}


def test_constants_relations_text(capsys):
    code, out, _ = run(capsys, "constants", "--d", "4", "--relations", "--format", "text")
    assert code == 0
    assert "W_4 = (-1/2 * a2)*V_3" in out
    assert "W_5 = (1/2 * a3)*V_3 + (1)*V_5" in out


def test_constants_core_limit_is_usage_error(capsys):
    code, _, err = run(capsys, "constants", "--d", "9")
    assert code == 1 and "--extended" in err


def test_constants_budget_gives_partial_table(capsys, monkeypatch, cold_tables):
    monkeypatch.setenv("TWOCYC_BUDGET", "1e-7")
    code, rep = run_json(capsys, "constants", "--d", "6", "--kmax", "13")
    assert code == 2
    assert rep["status"] == "inconclusive" and rep["result"]["partial"]
    assert "3" in rep["result"]["V"]
    assert rep["budget"] == pytest.approx(1e-7)


def test_bad_arguments_exit_1(capsys):
    assert run(capsys, "certify", "--d", "7")[0] == 1
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "upper", "--d", "4", "--budget", "-1")[0] == 1
    assert run(capsys, "certify", "--d", "5", "--point", "1,2")[0] == 1


def test_certify_d7(capsys):
    code, rep = run_json(capsys, "certify", "--d", "7", "--point", "0,0,1,0,0,-2")
    assert code == 0
    assert rep["result"]["verdict"] == "cyclicity 5"
    assert rep["result"]["determinant"] == "-35200"


def test_certify_d5_quadratic_point(capsys):
    code, rep = run_json(capsys, "certify", "--d", "5", "--point", "1,-1,(9+sqrt(55))/2,-(23+3*sqrt(55))/2")
    assert code == 0 and rep["result"]["determinant"] == "5280+736*sqrt(55)"


def test_certify_without_order_is_inconclusive(capsys):
    code, rep = run_json(capsys, "certify", "--d", "3", "--point", "0,0")
    assert code == 2 and not rep["result"]["certified"]


def test_upper_and_lrad(capsys):
    code, out, _ = run(capsys, "upper", "--d", "4", "--format", "text")
    assert code == 0 and "m = 3" in out and "cyclicity ≤ 2" in out
    code, rep = run_json(capsys, "lrad", "--d", "3")
    assert code == 0 and rep["result"]["ell"] == 2


def test_member_reduce_groebner(capsys, tmp_path):
    code, rep = run_json(capsys, "member", "--d", "6", "--ideal", "V3-11", "--poly", "W13")
    assert rep["result"]["member"] is False and rep["result"]["power"] == 2
    code, rep = run_json(capsys, "reduce", "--d", "4", "--ideal", "V3,5,7", "--poly", "W10")
    assert rep["result"]["normal_form"] == "0"
    basis = tmp_path / "gb.txt"
    code, rep = run_json(capsys, "groebner", "--d", "3", "--ideal", "a2^2 + a3; a3^2", "--basis-out", str(basis))
    assert code == 0 and basis.read_text().startswith("# ring")


def test_constructions(capsys):
    assert run_json(capsys, "even-construct", "--n", "3")[1]["result"]["determinant"] == "-320"
    assert run_json(capsys, "odd-construct", "--m", "2")[1]["result"]["values"] == {"21": "154"}
    code, rep = run_json(capsys, "involution", "--d", "5", "--solve-b7")
    assert rep["result"]["B"]["2"] == "2 * b2"
    assert "b2" in rep["result"]["b7"]["denominator"]


def test_sturm_file_and_stdin(capsys, monkeypatch):
    code, out, _ = run(capsys, "sturm", "--file", P16, "--format", "text")
    assert code == 0 and out.startswith("8 distinct real roots")
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("-2 0 1"))
    code, rep = run_json(capsys, "sturm", "--width", "1/1024")
    assert rep["result"]["count"] == 2


def test_resultant(capsys):
    code, rep = run_json(capsys, "resultant", "--p", "x^2 - 2", "--q", "x^2 - 3")
    assert rep["result"]["resultant"] == "1"


def test_orbits_with_figures_and_verify(capsys, tmp_path):
    out = tmp_path / "orbits.json"
    png, csv = tmp_path / "orbits.png", tmp_path / "orbits.csv"
    code, rep = run_json(
        capsys, "orbits", "--coeffs", "-7 0 10", "--global", "--out", str(out), "--plot", str(png), "--csv", str(csv)
    )
    assert code == 0 and rep["result"]["count"] == 3
    assert png.stat().st_size > 1000 and csv.read_text().startswith("x,h")
    assert json.loads(out.read_text())["result"]["count"] == 3
    code, text, _ = run(capsys, "orbits", "--coeffs", "-7 0 10", "--verify", str(out))
    assert code == 0 and "agrees" in text
    tampered = json.loads(out.read_text())
    tampered["result"]["count"] = 4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(tampered))
    code, text, _ = run(capsys, "orbits", "--coeffs", "-7 0 10", "--verify", str(bad))
    assert code == 3 and "DISAGREES" in text


def test_figures_default_next_to_outputs(capsys, tmp_path):
    out = tmp_path / "hr.json"
    code, rep = run_json(capsys, "half-return", "--ell", "1", "--sigma", "1", "--c", "0", "--out", str(out))
    assert code == 0 and rep["result"]["plot"] == str(tmp_path / "hr.png")
    assert (tmp_path / "hr.png").stat().st_size > 1000
    csv = tmp_path / "samples.csv"
    code, rep = run_json(capsys, "orbits", "--coeffs", "-7 0 10", "--global", "--csv", str(csv))
    assert (tmp_path / "samples.png").exists() and csv.exists()


def test_verify_rejects_other_command(capsys, tmp_path):
    out = tmp_path / "r.json"
    run(capsys, "resultant", "--p", "x-1", "--q", "x+1", "--out", str(out))
    assert run(capsys, "lrad", "--d", "2", "--verify", str(out))[0] == 1


def test_half_return_report(capsys, tmp_path):
    png = tmp_path / "hr.png"
    code, rep = run_json(capsys, "half-return", "--ell", "1", "--sigma", "-1", "--c", "2", "--x0", "0.01", "--plot", str(png))
    assert code == 0
    assert all(v <= 1e-6 for v in rep["result"]["errors"].values())
    assert png.exists()
    row = rep["result"]["table"][0]
    assert abs(row["ode"] - row["quadrature"]) <= 1e-10 * abs(row["ode"])


def test_reports_are_deterministic(capsys):
    _, a = run_json(capsys, "constants", "--d", "3")
    _, b = run_json(capsys, "constants", "--d", "3")
    assert reports.comparable(a) == reports.comparable(b)


def test_schema_rejects_malformed_report():
    import jsonschema

    rep = reports.make_report("sturm", {}, {"degree": 2, "count": -1, "intervals": []})
    with pytest.raises(jsonschema.ValidationError):
        reports.validate(rep)
