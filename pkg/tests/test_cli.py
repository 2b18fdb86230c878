import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from lancom.cli import main
from lancom.history import load_schema
from lancom.sparse import read_matrix_market


@pytest.fixture
def lap(tmp_path):
    path = tmp_path / "lap.mtx"
    assert main(["gen", "laplacian-l", "--nx", "20", "-o", str(path)]) == 0
    return path


def test_gen_small(tmp_path):
    out = tmp_path / "l2.mtx"
    assert main(["gen", "laplacian-l", "--nx", "2", "-o", str(out)]) == 0
    M = read_matrix_market(out).toarray()
    np.testing.assert_array_equal(M, 3 * np.array([[4, -1, -1], [-1, 4, 0], [-1, 0, 4]]))


def test_gen_default_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["gen", "laplacian-l", "--nx", "4"]) == 0
    assert read_matrix_market(tmp_path / "laplacian_l_4.mtx").n == 12


@pytest.mark.parametrize("argv", [
    ["gen", "laplacian-l", "--nx", "3"],
    ["gen", "other", "--nx", "4"],
    ["solve", "--matrix", "laplacian-l:10", "--k", "0"],
    ["solve", "--matrix", "laplacian-l:10", "--tol-res", "2"],
    ["solve", "--matrix", "laplacian-l:7"],
    ["solve", "--matrix", "laplacian-l:x"],
    ["solve", "--matrix", "laplacian-l:10", "--k", "5", "--m", "5"],
    ["solve", "--matrix", "/nonexistent/file.mtx"],
    ["bogus"],
    [],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_solve_lc(lap, tmp_path, capsys):
    out = tmp_path / "h.json"
    code = main(["solve", "--method", "lc", "--matrix", str(lap), "--k", "1", "--m", "60",
                 "--tol-res", "1e-8", "--tol-ra", "1e-6", "--seed", "42", "--output", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, load_schema())
    assert doc["converged"] and doc["checkpoints"]
    assert doc["seed"] == 42 and doc["method"] == "lc"
    assert "converged" in capsys.readouterr().err


@pytest.mark.parametrize("method", ["ks", "lanczos"])
def test_solve_other_methods(lap, tmp_path, method):
    out = tmp_path / f"{method}.json"
    assert main(["solve", "--method", method, "--matrix", str(lap), "--k", "2", "--m", "30",
                 "--output", str(out)]) == 0
    jsonschema.validate(json.loads(out.read_text()), load_schema())


def test_solve_is_deterministic(tmp_path):
    texts = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["solve", "--matrix", "laplacian-l:16", "--k", "2", "--m", "20",
                     "--output", str(out)]) == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_budget_exhaustion_exit_2(tmp_path):
    out = tmp_path / "h.json"
    assert main(["solve", "--matrix", "laplacian-l:20", "--k", "1", "--m", "20",
                 "--max-matvecs", "10", "--output", str(out)]) == 2
    assert json.loads(out.read_text())["converged"] is False


def test_csv_and_fill_in_flag(tmp_path):
    csv_path = tmp_path / "h.csv"
    code = main(["solve", "--matrix", "laplacian-l:16", "--k", "1", "--m", "20", "--fill-in", "off",
                 "--output", str(tmp_path / "h.json"), "--csv", str(csv_path)])
    assert code in (0, 2)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "matvecs,event,residual_estimate,ritz"
    assert len(lines) > 1


def test_compare_command(tmp_path, capsys):
    out = tmp_path / "rep.json"
    assert main(["compare", "--matrix", "laplacian-l:30", "--k", "1", "--m", "30", "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len(rep["lc_matvecs"]) == 5
    assert "KS" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lancom", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("lancom ")
