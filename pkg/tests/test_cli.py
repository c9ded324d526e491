import csv
import json
import subprocess
import sys

import pytest

from weylforms import cli
from weylforms._numeric import PrecisionError
from weylforms.forms import bilinear_family, format_system


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"sq": "n=1 d=2 r=1\nx1^2\n", "two": "n=2 d=2 r=1\nx1^2+x2^2\n",
                       "five": "n=5 d=2 r=1\nx1^2+x2^2+x3^2+x4^2-x5^2\n",
                       "q22": format_system(bilinear_family(2, 2))}.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


def test_count(files, capsys):
    code, rep, _ = run(capsys, "count", "--system", files["two"], "--P", "10")
    assert code == 0 and rep["payload"]["results"][0]["count"] == 1
    assert rep["provenance"]


def test_weyl_major_arc(files, capsys):
    code, rep, _ = run(capsys, "weyl", "--system", files["sq"], "--alpha", "1/3",
                       "--theta", "1", "--P", "10")
    out = rep["payload"]["runs"][0]["outcome"]
    assert code == 0 and (out["type"], out["q"], out["a"]) == ("MajorArc", 3, [1])


def test_weyl_dichotomy_with_k(files, capsys):
    code, rep, _ = run(capsys, "weyl", "--system", files["five"], "--alpha", "sqrt(2)",
                       "--theta", "1/2", "--P", "30", "--k", "1/2")
    assert code == 0
    assert rep["payload"]["runs"][0]["alternatives"]["i"]["holds"]


def test_invariants_bilinear(files, capsys):
    code, rep, _ = run(capsys, "invariants", "--system", files["q22"], "--b-bound", "3",
                       "--primes", "5,7,11,101")
    assert code == 0
    assert rep["payload"]["dim_V_star"] == 3 and rep["payload"]["u"] == 2


def test_expsum_and_csv(files, capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    code, rep, _ = run(capsys, "expsum", "--system", files["sq"], "--alpha", "1/2",
                       "--P", "4", "--P", "6", "--csv", str(out_csv))
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["P", "re", "im", "abs"] and len(rows) == 3
    assert abs(float(rows[1][1]) - 1) < 1e-12


def test_predict_csv(files, capsys, tmp_path):
    out_csv = tmp_path / "p.csv"
    code, rep, _ = run(capsys, "predict", "--system", files["five"], "--P", "10", "--P", "20",
                       "--qmax", "20", "--csv", str(out_csv))
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["P", "N", "prediction", "ratio"] and rows[2][1] == "39041"


def test_corpus_passes(capsys):
    code, rep, _ = run(capsys, "corpus")
    assert code == 0 and rep["payload"]["failed"] == []


def test_reports_are_byte_identical(files, capsys):
    argv = ["invariants", "--system", files["five"], "--b-bound", "2", "--seed", "4"]
    _, _, a = run(capsys, *argv)
    _, _, b = run(capsys, *argv)
    assert a == b
    _, _, c = run(capsys, *argv, "--timing")
    assert "timing" in json.loads(c) and "timing" not in json.loads(a)


def test_every_report_validates(files, capsys):
    for argv in (["count", "--system", files["sq"], "--P", "3"],
                 ["weyl", "--system", files["sq"], "--alpha", "2/7", "--P", "9"],
                 ["corpus"]):
        _, rep, _ = run(capsys, *argv)
        cli.validate_report(rep)


def test_input_errors_exit_1(files, capsys):
    assert cli.main(["expsum", "--system", files["sq"], "--alpha", "0.3", "--P", "5"]) == 1
    assert cli.main(["count", "--P", "5"]) == 1
    assert cli.main(["count", "--system", files["sq"], "--P", "0"]) == 1
    assert cli.main(["weyl", "--system", files["sq"], "--alpha", "1/3", "--P", "5",
                     "--theta", "2"]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 1


def test_precision_failure_exit_3(files, capsys, monkeypatch):
    def boom(*a, **k):
        raise PrecisionError("undecidable")
    monkeypatch.setattr(cli, "major_arc_approximation", boom)
    assert cli.main(["weyl", "--system", files["sq"], "--alpha", "sqrt(2)", "--P", "5"]) == 3


def test_assertion_failure_exit_2(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_corpus", lambda **k: [
        {"name": "broken", "expected": 1, "observed": 2, "passed": False}])
    assert cli.main(["corpus"]) == 2


def test_console_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "weylforms.cli", "count", "--system",
                          files["two"], "--P", "10"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["payload"]["results"][0]["count"] == 1


def test_split_top_level():
    assert cli.split_top_level("sqrt(2), 1/3,pi/7") == ["sqrt(2)", "1/3", "pi/7"]
