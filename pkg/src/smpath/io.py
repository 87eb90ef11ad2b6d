"""CSV and JSON artifacts.

Floats are written with 17 significant digits so that reruns can be compared
byte for byte; JSON keys are sorted.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Union

import numpy as np

from .fourier import BY_PARTS, FourierCoefficients
from .models import FieldSample, PathSample

PathLike = Union[str, Path]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_rows(path: PathLike, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _read_columns(path: PathLike, header) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        got = next(reader)
        if got != list(header):
            raise ValueError(f"{path}: expected header {header}, got {got}")
        data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    return data.reshape(-1, len(header))


def write_path_csv(path: PathLike, sample: PathSample) -> Path:
    """Columns ``t,value``."""
    return _write_rows(path, ("t", "value"),
                       ((fmt(t), fmt(v)) for t, v in zip(sample.grid, sample.values)))


def read_path_csv(path: PathLike) -> PathSample:
    data = _read_columns(path, ("t", "value"))
    return PathSample(data[:, 0], data[:, 1])


def write_field_csv(path: PathLike, field: FieldSample) -> Path:
    """``t,value`` for d = 1; ``x1,x2,value`` in row-major order for d = 2."""
    x = field.coordinates()
    if field.d == 1:
        return write_path_csv(path, PathSample(x, field.values))
    v = field.values
    rows = ((fmt(x[i]), fmt(x[j]), fmt(v[i, j])) for i in range(x.size) for j in range(x.size))
    return _write_rows(path, ("x1", "x2", "value"), rows)


def write_coefficients_csv(path: PathLike, c: FourierCoefficients) -> Path:
    """Columns ``k,xi,eta``; the k = 0 row carries eta = 0."""
    eta = np.concatenate(([0.0], c.eta))
    return _write_rows(path, ("k", "xi", "eta"),
                       ((str(k), fmt(x), fmt(e)) for k, (x, e) in enumerate(zip(c.xi, eta))))


def read_coefficients_csv(path: PathLike, method: str = BY_PARTS) -> FourierCoefficients:
    data = _read_columns(path, ("k", "xi", "eta"))
    return FourierCoefficients(data[:, 1], data[1:, 2], method)


def write_table_csv(path: PathLike, columns: dict) -> Path:
    """Per-replicate statistics: a ``replicate`` index column plus one column per key."""
    names = list(columns)
    cols = [np.asarray(columns[k], dtype=float) for k in names]
    size = cols[0].size if cols else 0
    rows = ([str(i)] + [fmt(c[i]) for c in cols] for i in range(size))
    return _write_rows(path, ["replicate"] + names, rows)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: PathLike, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def sha256_file(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
