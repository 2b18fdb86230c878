"""Convergence records and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


@dataclass
class Checkpoint:
    matvecs: int
    ritz: list
    residual_estimate: float | None = None
    event: str = "expand"
    compression: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "matvecs": int(self.matvecs),
            "ritz": [float(x) for x in self.ritz],
            "residual_estimate": None if self.residual_estimate is None else float(self.residual_estimate),
            "event": self.event,
        }
        if self.compression is not None:
            out["compression"] = dict(self.compression)
        return out


@dataclass
class ConvergenceHistory:
    method: str
    n: int
    k: int
    m: int | None
    tol_res: float
    tol_ra: float | None
    seed: int
    checkpoints: list = field(default_factory=list)
    converged: bool = False
    final_values: list = field(default_factory=list)
    residual_true: float | None = None
    stagnated: bool = False

    def add(self, cp: Checkpoint) -> Checkpoint:
        if self.checkpoints and cp.matvecs <= self.checkpoints[-1].matvecs:
            raise ValueError("checkpoint matvec counts must increase strictly")
        self.checkpoints.append(cp)
        return cp

    @property
    def last(self) -> Checkpoint:
        return self.checkpoints[-1]

    def compressions(self) -> list:
        return [cp for cp in self.checkpoints if cp.event == "compress"]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": int(self.n),
            "k": int(self.k),
            "m": None if self.m is None else int(self.m),
            "tol_res": float(self.tol_res),
            "tol_ra": None if self.tol_ra is None else float(self.tol_ra),
            "seed": int(self.seed),
            "checkpoints": [cp.to_dict() for cp in self.checkpoints],
            "converged": bool(self.converged),
            "stagnated": bool(self.stagnated),
            "final": {
                "values": [float(x) for x in self.final_values],
                "residual_true": None if self.residual_true is None else float(self.residual_true),
            },
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["matvecs", "event", "residual_estimate", "ritz"])
        for cp in self.checkpoints:
            est = "" if cp.residual_estimate is None else _num(cp.residual_estimate)
            w.writerow([cp.matvecs, cp.event, est, " ".join(_num(x) for x in cp.ritz)])
        return buf.getvalue()


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_num(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(", ")
            _encode(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits (NaN/inf as null)."""
    out: list = []
    _encode(obj, out)
    return "".join(out) + "\n"


def load_schema() -> dict:
    with resources.files("lancom").joinpath("history.schema.json").open("r") as fh:
        return json.load(fh)
