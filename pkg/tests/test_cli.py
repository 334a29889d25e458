import numpy as np
import pytest

from tabuport.cli import main
from tabuport.instance import format_orlib, random_instance
from tabuport.reporting import read_frontier_csv

FAST = ["--t-trials", "100", "--stagnation-limit", "5", "--parallel", "1", "--lambda-step", "0.25"]


@pytest.fixture
def port(tmp_path):
    path = tmp_path / "port0.txt"
    path.write_text(format_orlib(random_instance(9, np.random.default_rng(0))))
    return path


def test_uef(port, tmp_path, capsys):
    out = tmp_path / "uef.csv"
    assert main(["uef", str(port), "--out", str(out), "--uef-points", "50"]) == 0
    f = read_frontier_csv(out)
    assert 2 <= len(f) <= 50 and np.all(np.diff(f.returns) > 0)
    assert out.with_suffix(".svg").exists()
    assert main(["uef", str(port), "--out", str(tmp_path / "two.csv"), "--uef-points", "2", "--no-plot"]) == 0
    assert len((tmp_path / "two.csv").read_text().splitlines()) == 3
    assert not (tmp_path / "two.svg").exists()


def test_missing_file(tmp_path, capsys):
    assert main(["uef", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "u.csv")]) != 0
    assert "nope.txt" in capsys.readouterr().err
    assert not (tmp_path / "u.csv").exists()


def test_parse_error_position(tmp_path, capsys):
    bad = tmp_path / "port1.txt"
    bad.write_text("2\n0.1 0.2\n0.1 zz\n1 1 1\n1 2 0.5\n2 2 1\n")
    assert main(["uef", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "port1.txt" in err and "line 3, column 5" in err


def test_solve_and_metrics(port, tmp_path, capsys):
    uef, cef, trace = tmp_path / "uef.csv", tmp_path / "cef.csv", tmp_path / "trace.csv"
    assert main(["uef", str(port), "--out", str(uef), "--uef-points", "200"]) == 0
    args = ["solve", str(port), "--k", "3", "--out", str(cef), "--uef", str(uef), "--trace", str(trace)]
    assert main(args + FAST) == 0
    rows = read_frontier_csv(cef)
    assert len(rows) == 5
    for p in rows:
        assert abs(p.portfolio.weights.sum() - 1) <= 1e-9 and len(p.portfolio) == 3
    assert (tmp_path / "cef_summary.csv").read_text().startswith("lambda,seed,")
    assert trace.read_text().startswith("lambda,t1_call,q,iteration")
    assert "time_seconds" in capsys.readouterr().out

    first = cef.read_bytes()
    assert main(args + FAST) == 0
    assert cef.read_bytes() == first

    report = tmp_path / "report.csv"
    assert main(["metrics", str(cef), str(uef), "--out", str(report), "--time-seconds", "3.5"]) == 0
    text = report.read_text()
    assert text.startswith("metric,value\nmedian_percentage_error,")
    assert text.endswith("time_seconds,3.5\n")
    assert "mean percentage error" in capsys.readouterr().out


def test_metrics_identical_files(port, tmp_path):
    uef = tmp_path / "uef.csv"
    main(["uef", str(port), "--out", str(uef), "--uef-points", "30", "--no-plot"])
    assert main(["metrics", str(uef), str(uef), "--out", str(tmp_path / "r.csv")]) == 0
    values = [line.split(",")[1] for line in (tmp_path / "r.csv").read_text().splitlines()[1:5]]
    assert values == ["0.0"] * 4


def test_metrics_errors(tmp_path, capsys):
    empty, bad = tmp_path / "empty.csv", tmp_path / "bad.csv"
    empty.write_text("risk,return,lambda,assets,weights\n")
    bad.write_text("risk,reward,lambda,assets,weights\n1,2,,,\n")
    assert main(["metrics", str(empty), str(bad)]) == 1
    assert "'return'" in capsys.readouterr().err
    assert main(["metrics", str(empty), str(empty), "--out", str(tmp_path / "r.csv")]) == 1
    assert "no points" in capsys.readouterr().err
    assert not (tmp_path / "r.csv").exists()


def test_infeasible_bounds_before_reading(tmp_path, capsys):
    # the instance path does not even exist: the bounds are checked first
    code = main(["solve", str(tmp_path / "absent.txt"), "--epsilon", "0.2", "--k", "10"])
    assert code == 1
    assert "k * epsilon = 2 > 1" in capsys.readouterr().err


def test_k_equals_n(port, tmp_path):
    out = tmp_path / "cef.csv"
    assert main(["solve", str(port), "--k", "9", "--out", str(out), "--no-plot"] + FAST) == 0
    assert all(len(p.portfolio) == 9 for p in read_frontier_csv(out))
    assert main(["solve", str(port), "--k", "10", "--out", str(out)] + FAST) == 1


def test_module_entry_point(port, tmp_path):
    import subprocess
    import sys

    out = tmp_path / "u.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "tabuport", "uef", str(port), "--uef-points", "5", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
