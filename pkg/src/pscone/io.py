"""JSON and CSV forms of cones, pseudo-cones, measures, grids and reports.

Every file written here carries ``SCHEMA_VERSION``. JSON is written with
sorted keys and ``repr`` floats so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import PseudoConeError, ValidationError
from .geometry import Cone, QuadratureGrid, cone_from_dict
from .measures import DiscreteMeasure, discrete_measure
from .pseudocone import PseudoCone, gauss_indices, wulff_shape
from .solver import SolverResult
from .variational import VariationalReport

SCHEMA_VERSION = "pscone/1"


class InputError(PseudoConeError):
    """Unreadable or malformed input file."""

    exit_code = 6


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def cone_to_dict(C: Cone) -> dict:
    if C.kind == "circular":
        return {"kind": "circular", "axis": _floats(C.axis), "half_angle": C.half_angle, "n": C.n}
    return {"kind": "polyhedral", "generators": _floats(C.generators)}


def pseudocone_to_dict(K: PseudoCone) -> dict:
    return {
        "cone": cone_to_dict(K.cone),
        "facets": [{"u": _floats(u), "hbar": float(h)} for u, h in zip(K.normals, K.depths)],
    }


def pseudocone_from_dict(d: dict) -> PseudoCone:
    try:
        C = cone_from_dict(d["cone"])
        return wulff_shape(C, [(f["u"], f["hbar"]) for f in d["facets"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"pseudo-cone JSON is missing or mistypes a field: {exc}") from exc


def measure_to_dict(mu: DiscreteMeasure) -> dict:
    return {
        "atoms": [{"u": _floats(u), "w": float(w)} for u, w in zip(mu.atoms, mu.weights)],
        "total": float(mu.total),
    }


def measure_from_dict(d: dict) -> DiscreteMeasure:
    try:
        atoms = d["atoms"]
        return discrete_measure([a["u"] for a in atoms], [a["w"] for a in atoms])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"measure JSON is missing or mistypes a field: {exc}") from exc


def report_to_dict(report: VariationalReport) -> dict:
    return report.to_dict()


def result_to_dict(res: SolverResult) -> dict:
    """Solver summary without timing, so repeated runs serialize identically."""
    return {
        "status": res.status,
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "residual": res.residual,
        "c2": res.c2,
        "min_distance": res.min_distance,
        "max_distance": res.max_distance,
        "phi_final": res.phi_trace[-1],
        "solution": pseudocone_to_dict(res.solution),
    }


def grid_meta(grid: QuadratureGrid) -> dict:
    return {"grid_n": grid.resolution, "grid_size": grid.size, "scheme": grid.scheme, "seed": grid.seed}


def dumps(payload: dict, meta: dict | None = None) -> str:
    doc = {"schema": SCHEMA_VERSION, **payload}
    if meta is not None:
        doc["meta"] = meta
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, payload: dict, meta: dict | None = None) -> None:
    Path(path).write_text(dumps(payload, meta), encoding="utf-8")


def read_json(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    return doc


def _csv_text(header: list[str], rows, meta: dict | None) -> str:
    buf = io.StringIO()
    tags = {"schema": SCHEMA_VERSION, **(meta or {})}
    buf.write("# " + " ".join(f"{k}={tags[k]}" for k in sorted(tags)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def grid_csv(grid: QuadratureGrid) -> str:
    header = [f"v_{i + 1}" for i in range(grid.n)] + ["weight"]
    rows = (list(v) + [w] for v, w in zip(grid.nodes, grid.weights))
    return _csv_text(header, rows, grid_meta(grid))


def radial_csv(K: PseudoCone, grid: QuadratureGrid) -> str:
    rho, idx, tie = gauss_indices(K, grid.nodes)
    header = [f"v_{i + 1}" for i in range(K.n)] + ["rho", "gauss_index", "is_tie"]
    rows = (list(v) + [r, int(i), int(t)] for v, r, i, t in zip(grid.nodes, rho, idx, tie))
    return _csv_text(header, rows, grid_meta(grid))


def measure_csv(mu: DiscreteMeasure, meta: dict | None = None) -> str:
    header = [f"u_{i + 1}" for i in range(mu.atoms.shape[1])] + ["weight"]
    rows = (list(u) + [w] for u, w in zip(mu.atoms, mu.weights))
    return _csv_text(header, rows, meta)


def trace_csv(res: SolverResult, meta: dict | None = None) -> str:
    rows = ((r.iteration, r.phi, r.grad_norm, r.residual) for r in res.trace)
    return _csv_text(["iteration", "phi", "grad_norm", "residual"], rows, meta)
