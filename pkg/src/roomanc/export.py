"""Plain-text writers.  Numbers use 17 significant digits so files round-trip."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_column(path, values) -> Path:
    """One value per line, no header."""
    path = Path(path)
    path.write_text("".join(fmt(v) + "\n" for v in np.asarray(values).ravel()))
    return path


def read_column(path) -> np.ndarray:
    return np.array([float(s) for s in Path(path).read_text().split()])


def write_table(path, header, columns) -> Path:
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_matrix(path, matrix, integer=False) -> Path:
    path = Path(path)
    m = np.asarray(matrix)
    if integer:
        rows = (",".join(str(int(v)) for v in row) for row in m)
    else:
        rows = (",".join(fmt(v) for v in row) for row in m)
    path.write_text("\n".join(rows) + "\n")
    return path


def read_matrix(path) -> np.ndarray:
    rows = [line.split(",") for line in Path(path).read_text().splitlines() if line]
    return np.array([[float(v) for v in row] for row in rows])


def write_trace(path, d, e) -> Path:
    n = np.arange(len(d))
    return write_table(path, ("n", "d", "e"), (n, d, e))


def write_psd(path, freqs, power_db) -> Path:
    return write_table(path, ("frequency_hz", "power_db"), (freqs, power_db))


def write_map(directory, amap, prefix="map") -> list[Path]:
    """Values and mask as matrices with rows indexed by y and columns by x."""
    directory = Path(directory)
    return [
        write_matrix(directory / f"{prefix}_values.csv", amap.values.T),
        write_matrix(directory / f"{prefix}_mask.csv", amap.mask.T, integer=True),
        write_column(directory / f"{prefix}_grid_x.csv", amap.grid_x),
        write_column(directory / f"{prefix}_grid_y.csv", amap.grid_y),
    ]


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path
