import csv
import io
import json

import pytest

from cwe.cli import run
from cwe.errors import DataParseError
from cwe.io import csv_text, parse_dataset


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- dataset parsing ------------------------------------------------------------------


def test_parse_csv_with_header(line_csv):
    d = parse_dataset(line_csv)
    assert d.is_pairs and list(d.y) == [0.8, 2.5, 2.9]


def test_parse_single_column(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("0.5\n-1\n\n2e-1\n")
    assert list(parse_dataset(p, kind="values").x) == [0.5, -1.0, 0.2]


def test_parse_json(tmp_path):
    p = tmp_path / "d.json"
    p.write_text("[[1, 0.8], [2, 2.5]]")
    assert parse_dataset(p, kind="pairs").is_pairs


@pytest.mark.parametrize("text,fragment", [
    ("", "empty"),
    ("x,y\n", "no rows"),
    ("1,2\n3\n", "line 2"),
    ("1\nabc\n", "line 2"),
    ("1\nnan\n", "non-finite"),
    ("[1, \"a\"]", "element 1"),
    ("[1, 2", "invalid JSON"),
    ("1,2,3\n", "(x, y) pair"),
])
def test_parse_errors(tmp_path, text, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DataParseError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        parse_dataset(p)


def test_parse_kind_mismatch(line_csv):
    with pytest.raises(DataParseError):
        parse_dataset(line_csv, kind="values")


def test_parse_missing_file(tmp_path):
    with pytest.raises(DataParseError):
        parse_dataset(tmp_path / "missing.csv")


def test_csv_text_round_trips_floats():
    text = csv_text(["v"], [[0.1 + 0.2]])
    assert float(text.splitlines()[1]) == 0.1 + 0.2


# --- subcommands -----------------------------------------------------------------------


def test_ci_table(capsys):
    code, out, _ = invoke(capsys, "ci-table", "--levels", "68.27,95")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert float(rows[1]["hi"]) == pytest.approx(1.959964, abs=1e-6)


def test_normal_mu(capsys):
    code, out, _ = invoke(capsys, "normal-mu", "--values", "0", "--observable", "param-squared",
                          "--x2", "0")
    rep = json.loads(out)
    assert code == 0 and rep["method"] == "cwe-alpha-space"
    assert rep["estimate"] == pytest.approx(1.0, rel=1e-2)
    assert rep["diagnostics"]["predictive_density"][0]["density"] == pytest.approx(0.2821, abs=1e-3)
    assert rep["config"]["levels"] == 2000


def test_normal_mu_closed_weight(capsys):
    code, out, _ = invoke(capsys, "normal-mu", "--values", "0.5", "--method", "closed-weight")
    assert code == 0 and json.loads(out)["estimate"] == pytest.approx(0.5, abs=1e-6)


def test_normal_sigma(capsys, tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("value\n1.0\n-0.5\n")
    code, out, _ = invoke(capsys, "normal-sigma", "--input", str(p), "--mu", "0")
    rep = json.loads(out)
    assert code == 0 and rep["config"]["observable"] == "log-param" and rep["K"] == 1.0


def test_binomial_csv(capsys):
    code, out, _ = invoke(capsys, "binomial", "--n", "10", "--k", "0,5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["k"] for r in rows] == ["0", "5"]
    assert float(rows[1]["expected"]) == pytest.approx(5.0, abs=1e-9)
    assert list(rows[0]) == ["k", "most_likely", "std_ml", "expected", "std_expected"]


def test_linfit_all(capsys, line_csv):
    code, out, _ = invoke(capsys, "linfit", "--input", str(line_csv), "--method", "all",
                          "--grid", "201", "--levels", "100", "--bayes-grid", "401")
    reports = {r["method"]: r for r in json.loads(out)["reports"]}
    assert code == 0 and set(reports) == {"least-squares", "bayes-flat", "cwe-contour"}
    assert reports["least-squares"]["spread"] == pytest.approx(3.157, abs=1e-3)


def test_linfit_exports(capsys, line_csv, tmp_path):
    g, c = tmp_path / "grid.csv", tmp_path / "contours.csv"
    code, _, _ = invoke(capsys, "linfit", "--input", str(line_csv), "--grid", "201",
                        "--levels", "100", "--export-grid", str(g), "--export-contours", str(c))
    assert code == 0
    assert g.read_text().splitlines()[0] == "a,b,alpha"
    assert len(g.read_text().splitlines()) == 201 * 201 + 1
    assert c.read_text().splitlines()[0] == "level,polyline_id,vertex_index,a,b"


def test_vase(capsys):
    code, out, _ = invoke(capsys, "vase")
    doc = json.loads(out)
    assert code == 0 and doc["expected_p_blue"]["exact"] == "843/19100"


def test_validate_alpha(capsys):
    code, out, _ = invoke(capsys, "validate-alpha", "--model", "binomial", "--n", "10",
                          "--k", "2", "--p", "0.3", "--samples", "20000")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["config"]["seed"] == 42


def test_output_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert run(["vase", "-o", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["red_counts"][0] == 91


def test_repeat_runs_identical(capsys, line_csv):
    argv = ["linfit", "--input", str(line_csv), "--method", "all", "--grid", "201",
            "--levels", "100", "--bayes-grid", "401"]
    first = invoke(capsys, *argv)[1]
    assert invoke(capsys, *argv)[1] == first


# --- exit codes --------------------------------------------------------------------------


def test_exit_bad_arguments(capsys):
    assert invoke(capsys, "binomial", "--n", "10")[0] == 2
    assert invoke(capsys, "binomial", "--n", "10", "--k", "11")[0] == 2
    assert invoke(capsys, "normal-mu", "--values", "0", "--levels", "10")[0] == 2


def test_exit_parse_failure(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n1,oops\n")
    code, _, err = invoke(capsys, "linfit", "--input", str(p))
    assert code == 3 and "line 2" in err


def test_exit_numerical_failure(capsys):
    assert invoke(capsys, "normal-sigma", "--values", "1,1", "--mu", "1")[0] == 4
