"""Artifact and state serialization: JSON (round-trip bit-exact through
shortest-repr floats), CSV with complex columns split into _re/_im pairs,
and gnuplot-ready matrix blocks for Wigner grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    BasisSpec,
    DensityMatrix,
    Fock,
    KetState,
    Operator,
    TwoLevel,
    ValidationError,
)
from .phasespace import WignerGrid


@dataclass
class SeriesArtifact:
    """Named output columns plus reproducibility metadata."""

    scenario: str
    params: dict
    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(np.atleast_1d(v)) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValidationError(f"unequal column lengths: {lengths}")


def _column_payload(values) -> dict:
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        return {"re": arr.real.tolist(), "im": arr.imag.tolist()}
    return {"values": arr.tolist()}


def _column_restore(payload: dict) -> np.ndarray:
    if "re" in payload:
        return np.asarray(payload["re"]) + 1j * np.asarray(payload["im"])
    return np.asarray(payload["values"])


def artifact_to_json(art: SeriesArtifact) -> str:
    doc = {
        "scenario": art.scenario,
        "params": art.params,
        "columns": {k: _column_payload(v) for k, v in art.columns.items()},
        "metadata": art.metadata,
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def artifact_from_json(text: str) -> SeriesArtifact:
    doc = json.loads(text)
    return SeriesArtifact(
        scenario=doc["scenario"],
        params=doc["params"],
        columns={k: _column_restore(v) for k, v in doc["columns"].items()},
        metadata=doc["metadata"],
    )


def artifact_to_csv(art: SeriesArtifact) -> str:
    headers = []
    cols = []
    for name, values in art.columns.items():
        arr = np.atleast_1d(np.asarray(values))
        if np.iscomplexobj(arr):
            headers += [f"{name}_re", f"{name}_im"]
            cols += [arr.real, arr.imag]
        else:
            headers.append(name)
            cols.append(arr)
    lines = [",".join(headers)]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def wigner_to_csv(w: WignerGrid) -> str:
    lines = ["x,p,w"]
    for i, xv in enumerate(w.grid.x):
        for j, pv in enumerate(w.grid.p):
            lines.append(f"{xv!r},{pv!r},{w.values[i, j]!r}")
    return "\n".join(lines) + "\n"


def wigner_to_gnuplot(w: WignerGrid) -> str:
    """Blank-line separated blocks of "x p W" rows (splot-ready)."""
    chunks = []
    for i, xv in enumerate(w.grid.x):
        rows = [f"{xv!r} {pv!r} {w.values[i, j]!r}"
                for j, pv in enumerate(w.grid.p)]
        chunks.append("\n".join(rows))
    return "\n\n".join(chunks) + "\n"


# ---------------------------------------------------------------------------
# Operator / state fixtures
# ---------------------------------------------------------------------------

def _basis_payload(basis: BasisSpec) -> list:
    out = []
    for f in basis.factors:
        if isinstance(f, Fock):
            out.append({"type": "fock", "n_max": f.n_max})
        elif isinstance(f, TwoLevel):
            out.append({"type": "two_level"})
        else:
            raise ValidationError(f"unknown factor {f!r}")
    return out


def _basis_restore(payload: list) -> BasisSpec:
    factors = []
    for item in payload:
        if item["type"] == "fock":
            factors.append(Fock(item["n_max"]))
        elif item["type"] == "two_level":
            factors.append(TwoLevel())
        else:
            raise ValidationError(f"unknown factor type {item['type']!r}")
    return BasisSpec(tuple(factors))


def state_to_json(obj) -> str:
    if isinstance(obj, Operator):
        doc = {"kind": "operator", "basis": _basis_payload(obj.basis),
               "entries": _column_payload(obj.entries)}
    elif isinstance(obj, KetState):
        doc = {"kind": "ket", "basis": _basis_payload(obj.basis),
               "amplitudes": _column_payload(obj.amplitudes),
               "leakage": obj.leakage}
    elif isinstance(obj, DensityMatrix):
        doc = {"kind": "density_matrix", "basis": _basis_payload(obj.basis),
               "entries": _column_payload(obj.entries),
               "leakage": obj.leakage}
    else:
        raise ValidationError(f"cannot serialize {type(obj)!r}")
    return json.dumps(doc, sort_keys=True)


def state_from_json(text: str):
    doc = json.loads(text)
    basis = _basis_restore(doc["basis"])
    kind = doc["kind"]
    if kind == "operator":
        return Operator(basis, _column_restore(doc["entries"]))
    if kind == "ket":
        return KetState(basis, _column_restore(doc["amplitudes"]),
                        leakage=doc.get("leakage", 0.0))
    if kind == "density_matrix":
        return DensityMatrix(basis, _column_restore(doc["entries"]),
                             leakage=doc.get("leakage", 0.0))
    raise ValidationError(f"unknown kind {kind!r}")
