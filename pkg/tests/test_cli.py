import csv

import pytest

from noma_mec import cli
from noma_mec.model import Allocation, objective
from noma_mec.scenarios import generate


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("M = 2\nseed = 1\nkappa = 1e-27, 1e-28\n")
    return path


def _record(path):
    out = {}
    for line in path.read_text().splitlines():
        key, value = line.split(" = ", 1)
        out[key] = value
    return out


def _csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    return list(csv.DictReader(lines[1:]))


@pytest.mark.parametrize("solver", ["bss", "closed2", "oracle", "ofdma", "full", "local"])
def test_solve_every_solver(tmp_path, cfg, solver):
    out = tmp_path / "out.txt"
    assert cli.main(["solve", str(cfg), "--solver", solver, "--out", str(out)]) == 0
    rec = _record(out)
    assert rec["schema_version"] == "1"
    assert rec["status"] == "ok"
    assert rec["solver"] == solver
    assert float(rec["alpha_star"]) > 0


def test_bss_and_closed_form_agree(tmp_path, cfg):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    cli.main(["solve", str(cfg), "--solver", "bss", "--out", str(a)])
    cli.main(["solve", str(cfg), "--solver", "closed2", "--out", str(b)])
    assert float(_record(a)["alpha_star"]) == pytest.approx(float(_record(b)["alpha_star"]), abs=1e-3)
    assert len([k for k in _record(a) if k.startswith("trace.")]) == int(_record(a)["iterations"])


def test_local_solution_meets_its_own_objective(tmp_path):
    path = tmp_path / "one.cfg"
    path.write_text("M = 1\nseed = 2\n")
    out = tmp_path / "out.txt"
    assert cli.main(["solve", str(path), "--out", str(out)]) == 0
    rec = _record(out)
    sc = generate(2, 1)
    alloc = Allocation([float(rec["beta"])], [float(rec["p"])])
    assert objective(sc, alloc) <= float(rec["alpha_star"]) + 1e-4


def test_usage_errors(tmp_path, cfg, capsys):
    three = tmp_path / "three.cfg"
    three.write_text("M = 3\n")
    four = tmp_path / "four.cfg"
    four.write_text("M = 4\n")
    assert cli.main(["solve", str(three), "--solver", "closed2"]) == 2
    assert cli.main(["solve", str(four), "--solver", "oracle"]) == 2
    assert cli.main(["sweep", str(cfg), "--vary", "p_max", "--values", ""]) == 2
    assert cli.main(["sweep", str(cfg), "--vary", "p_max", "--values", "0.01", "--solvers", "nope"]) == 2
    assert cli.main(["sweep", str(cfg), "--vary", "M", "--values", "1.5"]) == 2
    assert cli.main(["solve", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert "error" in capsys.readouterr().err


def test_infeasible_exit_code(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("M = 1\nf_loc = 1e9\nkappa = 1e-26\npathloss = 6\n")
    out = tmp_path / "out.txt"
    assert cli.main(["solve", str(path), "--out", str(out)]) == 3
    assert _record(out)["status"] == "infeasible"
    sweep = tmp_path / "s.csv"
    assert cli.main(["sweep", str(path), "--vary", "p_max", "--values", "0.01", "--out", str(sweep)]) == 3
    assert _csv(sweep)[0]["alpha_star"] == "inf"


def test_sweep_rows_and_average(tmp_path, cfg):
    out = tmp_path / "s.csv"
    args = ["sweep", str(cfg), "--vary", "e_max", "--values", "0.05,0.2", "--solvers", "bss,local", "--trials", "2"]
    assert cli.main(args + ["--out", str(out)]) == 0
    rows = _csv(out)
    assert list(rows[0]) == cli.SWEEP_COLUMNS
    assert len(rows) == 2 * 2 * 2
    assert [r["seed"] for r in rows[:2]] == ["1", "2"]
    assert cli.main(args + ["--average", "--out", str(out)]) == 0
    rows = _csv(out)
    assert len(rows) == 4
    assert rows[0]["seed"] == "mean2"


def test_sweep_over_user_count(tmp_path, cfg):
    path = tmp_path / "m.cfg"
    path.write_text("seed = 1\n")
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", str(path), "--vary", "M", "--values", "1,2,4", "--solvers", "bss,ofdma",
                     "--out", str(out)]) == 0
    alphas = {(r["value"], r["solver"]): float(r["alpha_star"]) for r in _csv(out)}
    for m in ("1.0", "2.0", "4.0"):
        assert alphas[(m, "bss")] <= alphas[(m, "ofdma")] + 1e-4


def test_trace_csv(tmp_path, cfg):
    out = tmp_path / "t.csv"
    assert cli.main(["trace", str(cfg), "--out", str(out)]) == 0
    rows = _csv(out)
    assert rows[-2]["iteration"] == "final"
    assert rows[-1]["iteration"] == "closed2"
    assert [int(r["iteration"]) for r in rows[:-2]] == list(range(1, len(rows) - 1))
    assert float(rows[-1]["mid"]) == pytest.approx(float(rows[-2]["mid"]), abs=1e-3)
