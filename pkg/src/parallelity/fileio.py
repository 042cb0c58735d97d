"""JSON file formats for states, sequences and result records.

A matrix file looks like::

    {"dim": 2, "matrix": [[[0.7, 0.0], [0.0, 0.0]],
                          [[0.0, 0.0], [0.3, 0.0]]]}

with every complex entry written as ``[re, im]``. A sequence file wraps a
list of such payloads under ``"states"``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import IoError, ParseError


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def matrix_payload(m: np.ndarray) -> dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "matrix": encode_matrix(m)}


def decode_matrix(payload: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(payload, dict) or "matrix" not in payload:
        raise ParseError(f"{where}: expected an object with a 'matrix' field")
    rows = payload["matrix"]
    dim = payload.get("dim", len(rows) if isinstance(rows, list) else None)
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{where}: 'dim' must be a positive integer")
    if not isinstance(rows, list) or len(rows) != dim:
        raise ParseError(f"{where}: expected {dim} rows")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"{where}: row {i} must have {dim} entries", row=i)
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
            ):
                raise ParseError(f"{where}: entry ({i}, {j}) must be [re, im]", row=i, col=j)
            if not all(math.isfinite(x) for x in entry):
                raise ParseError(f"{where}: entry ({i}, {j}) is not finite", row=i, col=j)
            out[i, j] = complex(entry[0], entry[1])
    return out


def _load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror}", path=str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", path=str(path)) from None


def read_matrix_file(path: str | Path) -> np.ndarray:
    return decode_matrix(_load_json(path), where=str(path))


def read_sequence_file(path: str | Path) -> list[np.ndarray]:
    data = _load_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("states"), list):
        raise ParseError(f"{path}: expected an object with a 'states' list", path=str(path))
    states = data["states"]
    if len(states) < 2:
        raise ParseError(f"{path}: a sequence needs at least two states", path=str(path))
    mats = [decode_matrix(s, where=f"{path}: state {i}") for i, s in enumerate(states)]
    if len({m.shape for m in mats}) != 1:
        raise ParseError(f"{path}: states have different dimensions", path=str(path))
    return mats


def write_matrix_file(path: str | Path, m: np.ndarray) -> None:
    Path(path).write_text(json.dumps(matrix_payload(m)) + "\n", encoding="utf-8")


def write_sequence_file(path: str | Path, mats) -> None:
    payload = {"states": [matrix_payload(m) for m in mats]}
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def dumps_record(record: dict[str, Any]) -> str:
    # json writes floats with repr(), so every double round-trips exactly
    return json.dumps(record, indent=2, allow_nan=False)
