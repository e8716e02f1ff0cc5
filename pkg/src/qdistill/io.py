"""State files (JSON) and sweep tables (CSV).

A state file looks like::

    {"format": 1, "basis": "00,01,10,11",
     "matrix": [[[re, im], [re, im], [re, im], [re, im]], ...]}

Floats are written with 17 significant digits, so reading a file and
writing it back reproduces it exactly.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import QDistillError
from .linalg import BASIS_LABELS
from .states import DensityMatrix

FORMAT_VERSION = 1
BASIS = ",".join(BASIS_LABELS)
SWEEP_COLUMNS = ("n", "probability", "concurrence", "eof", "marginal_deviation")


class StateFileError(QDistillError, ValueError):
    """The document is not a well-formed state file."""


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise StateFileError(f"{where}: expected a number, got {x!r}")
    return float(x)


def matrix_from_document(doc) -> np.ndarray:
    """Extract the raw 4x4 complex matrix from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise StateFileError("top level must be an object")
    if "format" in doc and doc["format"] != FORMAT_VERSION:
        raise StateFileError(f"unsupported format {doc['format']!r}")
    if "basis" in doc and doc["basis"] != BASIS:
        raise StateFileError(f"basis must be {BASIS!r}, got {doc['basis']!r}")
    rows = doc.get("matrix")
    if not isinstance(rows, list) or len(rows) != 4:
        raise StateFileError("'matrix' must be a list of 4 rows")
    m = np.zeros((4, 4), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 4:
            raise StateFileError(f"row {i} must hold 4 entries")
        for j, entry in enumerate(row):
            if not isinstance(entry, list) or len(entry) != 2:
                raise StateFileError(f"entry ({i}, {j}) must be a [re, im] pair")
            m[i, j] = complex(_number(entry[0], f"entry ({i}, {j})"),
                              _number(entry[1], f"entry ({i}, {j})"))
    return m


def parse_state(text: str) -> DensityMatrix:
    """Parse state-file text.

    Raises
    ------
    StateFileError
        On malformed JSON or schema violations.
    InvalidState
        When the matrix is not a density matrix.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"invalid JSON: {exc}") from exc
    return DensityMatrix(matrix_from_document(doc))


def read_state(path) -> DensityMatrix:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc}") from exc
    return parse_state(text)


def _fmt(x: float) -> str:
    s = format(float(x), ".17g")
    # keep JSON floats recognisable as floats
    return s if any(ch in s for ch in ".eni") else s + ".0"


def format_state(rho) -> str:
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    rows = []
    for i in range(4):
        entries = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in m[i])
        rows.append(f"    [{entries}]")
    return ('{\n  "format": %d,\n  "basis": "%s",\n  "matrix": [\n%s\n  ]\n}\n'
            % (FORMAT_VERSION, BASIS, ",\n".join(rows)))


def write_state(path, rho) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_state(rho))


def write_sweep(fh, steps) -> None:
    """Write protocol steps as CSV: a format comment, the header, then one row per step."""
    fh.write(f"# format: {FORMAT_VERSION}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for step in steps:
        writer.writerow([str(int(step.n))] + [format(float(getattr(step, c)), ".12g")
                                              for c in SWEEP_COLUMNS[1:]])


def read_sweep(fh) -> list:
    """Read a sweep CSV back as a list of dicts with float values (``n`` as int)."""
    lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
        raise StateFileError(f"sweep header must be {','.join(SWEEP_COLUMNS)}")
    return [{k: (int(v) if k == "n" else float(v)) for k, v in row.items()} for row in reader]
