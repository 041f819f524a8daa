import json
import subprocess
import sys

import pytest

from mlsie.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, run
from mlsie.study import CSV_COLUMNS, read_report_csv

EXACT_CASE = [
    "study", "--dim", "1", "--domain", "0,1", "--lambda", "1", "--kernel", "x*s", "--rhs", "4*x/3",
    "--exact", "x", "--m", "1", "--levels", "11,21,41", "--quad", "gl:4",
]


def test_degenerate_study(tmp_path):
    out = tmp_path / "run.csv"
    assert run(EXACT_CASE + ["--out", str(out)]) == EXIT_OK
    rows = read_report_csv(out)
    assert out.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert [r["N"] for r in rows] == [11, 21, 41]
    assert all(r["err_uN_inf"] <= 1e-10 for r in rows)


def test_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(EXACT_CASE + ["--out", str(a)])
    run(EXACT_CASE + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_approx_rate(tmp_path):
    out = tmp_path / "a.csv"
    code = run(["approx", "--dim", "1", "--exact", "sin(pi*x)", "--m", "2", "--levels", "21,41,81", "--out", str(out)])
    assert code == EXIT_OK
    assert 2.7 <= read_report_csv(out)[-1]["rate_uN"] <= 3.5


def test_syntax_error_exit_2(tmp_path, capsys):
    out = tmp_path / "never.csv"
    code = run(["solve", "--kernel", "x+*s", "--rhs", "x", "--out", str(out)])
    assert code == EXIT_CONFIG
    assert "offset 2" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["study", "--rhs", "x"],  # no kernel
        ["study", "--kernel", "x*s"],  # no rhs or exact
        ["study", "--kernel", "x*s", "--rhs", "x", "--lambda", "0"],
        ["study", "--kernel", "x*s", "--rhs", "x", "--quad", "simpson:3"],
        ["study", "--kernel", "x*s", "--rhs", "x", "--levels", "a,b"],
        ["study", "--kernel", "x*s", "--rhs", "x", "--domain", "0,1,0,1"],
        ["study", "--kernel", "x*y", "--rhs", "x"],
        ["approx"],
        ["bogus"],
    ],
)
def test_config_errors(tmp_path, argv, capsys):
    out = tmp_path / "never.csv"
    assert run(argv + ["--out", str(out)] if argv != ["bogus"] else argv) == EXIT_CONFIG
    assert not out.exists()


def test_numerical_failure_exit_1(tmp_path, capsys):
    out = tmp_path / "fail.csv"
    argv = ["study", "--kernel", "1", "--rhs", "1", "--lambda", "-1", "--m", "0", "--levels", "1", "--out", str(out)]
    assert run(argv) == EXIT_NUMERICAL
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[-1].startswith("# failure: ")
    assert "numerical failure" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    assert run(EXACT_CASE + ["--out", str(tmp_path / "missing" / "x.csv")]) == EXIT_NUMERICAL


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# degenerate case\nkernel = x*s\nrhs = 4*x/3\nexact = x\nlambda = 1\nm = 1\nlevels = 5,11\nquad = gl:2\n")
    out = tmp_path / "out.csv"
    assert run(["study", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert [r["N"] for r in read_report_csv(out)] == [5, 11]
    # flags override file values
    assert run(["study", "--config", str(cfg), "--levels", "21", "--out", str(out)]) == EXIT_OK
    assert [r["N"] for r in read_report_csv(out)] == [21]


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kernel = x*s\ncolour = blue\n")
    assert run(["study", "--config", str(cfg)]) == EXIT_CONFIG
    assert run(["study", "--config", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


def test_jsonl(tmp_path):
    out = tmp_path / "r.jsonl"
    assert run(EXACT_CASE + ["--levels", "5,11", "--format", "jsonl", "--out", str(out)]) == EXIT_OK
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(recs) == 2 and list(recs[0]) == list(CSV_COLUMNS)


def test_solve_values(tmp_path):
    out, vals = tmp_path / "s.csv", tmp_path / "v.csv"
    argv = ["solve", "--kernel", "x*s", "--rhs", "4*x/3", "--levels", "5,11", "--values", str(vals), "--out", str(out)]
    assert run(argv) == EXIT_OK
    assert len(read_report_csv(out)) == 1
    lines = vals.read_text().splitlines()
    assert lines[0] == "x,u_tilde" and len(lines) == 6
    for line in lines[1:]:
        x, u = map(float, line.split(","))
        assert abs(x - u) <= 1e-10


def test_diagnose(tmp_path):
    out = tmp_path / "d.csv"
    assert run(["diagnose", "--kernel", "exp(x-s)", "--rhs", "1", "--levels", "11,21", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "level,N,h,q,cqu,delta,phi_inv_norm,c1,fn_norm,condition"


def test_2d_solve(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["study", "--dim", "2", "--kernel", "x1*s1", "--exact", "x1*x2", "--m", "2", "--levels", "5,9",
            "--quad", "gl:3", "--eval-points", "21", "--out", str(out)]
    assert run(argv) == EXIT_OK
    assert max(r["err_uN_inf"] for r in read_report_csv(out)) < 1e-9


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "mlsie", *EXACT_CASE[:-4], "--levels", "5", "--quad", "gl:2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == ",".join(CSV_COLUMNS)
