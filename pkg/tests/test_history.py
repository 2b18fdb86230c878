import csv
import io
import json

import jsonschema
import numpy as np
import pytest

from lancom.history import Checkpoint, ConvergenceHistory, dumps, load_schema
from lancom.lanczos import lc_solve


def _hist():
    h = ConvergenceHistory("lc", 10, 1, 5, 1e-8, 1e-6, 0)
    h.add(Checkpoint(1, [0.1]))
    h.add(Checkpoint(2, [1 / 3], residual_estimate=0.5, event="compress",
                     compression={"ell": 3, "k_hat": 1, "p": 2, "degree_bound": 4}))
    return h


def test_counts_must_increase():
    h = _hist()
    with pytest.raises(ValueError):
        h.add(Checkpoint(2, []))


def test_json_shape_and_schema():
    h = _hist()
    doc = json.loads(h.to_json())
    jsonschema.validate(doc, load_schema())
    assert doc["checkpoints"][1]["compression"]["ell"] == 3
    assert doc["final"] == {"values": [], "residual_true": None}


def test_floats_use_17_digits():
    text = dumps({"x": 1 / 3, "y": 2.0, "z": float("nan"), "w": np.float64(0.1), "i": np.int64(3)})
    assert text == '{"x": 0.33333333333333331, "y": 2.0, "z": null, "w": 0.10000000000000001, "i": 3}\n'
    assert json.loads(text)["x"] == 1 / 3


def test_dumps_rejects_unknown():
    with pytest.raises(TypeError):
        dumps({"a": object()})


def test_csv_rows():
    rows = list(csv.reader(io.StringIO(_hist().to_csv())))
    assert rows[0] == ["matvecs", "event", "residual_estimate", "ritz"]
    assert rows[2][:3] == ["2", "compress", "0.5"]
    assert float(rows[2][3]) == 1 / 3
    assert len(rows) == 3


def test_solver_history_validates(sparse200):
    _, h = lc_solve(sparse200, 2, 20, seed=0)
    jsonschema.validate(json.loads(h.to_json()), load_schema())
    assert h.compressions() == [cp for cp in h.checkpoints if cp.event == "compress"]
