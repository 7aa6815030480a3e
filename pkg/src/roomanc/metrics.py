"""Steady-state attenuation, top-percentile thresholding and attenuation maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, InsufficientDataError, InvalidArgumentError

#: z-score whose upper tail holds 2.5% of a normal distribution.
TOP_PERCENTILE_Z = 1.96

#: Value substituted for +inf (zero residual) when reporting.
PERFECT_CANCELLATION_DB = 200.0


def steady_state(x) -> np.ndarray:
    """Drop the first third (floor(N/3) samples) of ``x``."""
    x = np.asarray(x, dtype=float)
    return x[x.size // 3:]


def estimated_attenuation(d, e) -> float:
    """10*log10(Var[d] / Var[e]) over the steady-state window of both signals.

    Population variances.  Returns ``inf`` when the residual has zero variance;
    see :func:`report_db` for the capped form.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    if d.shape != e.shape or d.ndim != 1:
        raise InvalidArgumentError("d and e must be 1-D and of equal length")
    if d.size < 3:
        raise InvalidArgumentError("need at least 3 samples")
    var_d = np.var(steady_state(d))
    var_e = np.var(steady_state(e))
    if not (math.isfinite(var_d) and math.isfinite(var_e)):
        raise DegenerateInputError("signal power is not finite")
    if var_d == 0.0:
        raise DegenerateInputError("disturbance has zero variance in the steady-state window")
    if var_e == 0.0:
        return math.inf
    return float(10.0 * np.log10(var_d / var_e))


def report_db(value: float) -> tuple[float, bool]:
    """Cap perfect cancellation for reporting; returns ``(value, was_capped)``."""
    if value > PERFECT_CANCELLATION_DB:
        return PERFECT_CANCELLATION_DB, True
    return value, False


def _threshold(values: np.ndarray) -> float:
    return float(values.mean() + TOP_PERCENTILE_Z * values.std())


def threshold_top(values) -> float:
    """Top-percentile cut-off ``mean + 1.96 * std`` (population std)."""
    v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
    if v.size < 2:
        raise InsufficientDataError("threshold needs at least two values")
    return _threshold(v)


@dataclass(frozen=True)
class Grid:
    """Rectilinear grid of candidate loudspeaker positions at height ``z``."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    z: float

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.xs), len(self.ys)


@dataclass(eq=False)
class AttenuationMap:
    grid_x: np.ndarray
    grid_y: np.ndarray
    values: np.ndarray  # (len(grid_x), len(grid_y)); NaN where absent
    mask: np.ndarray
    mean_db: float
    std_db: float
    max_db: float
    min_db: float
    threshold_db: float
    argmax: tuple[int, int]
    capped: np.ndarray
    grid_z: float = math.nan
    info: dict = field(default_factory=dict)

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def count(self) -> int:
        return int(self.present.sum())

    @property
    def argmax_xy(self) -> tuple[float, float]:
        i, j = self.argmax
        return float(self.grid_x[i]), float(self.grid_y[j])

    def summary(self) -> dict:
        bx, by = self.argmax_xy
        return {
            "mean_db": self.mean_db,
            "std_db": self.std_db,
            "min_db": self.min_db,
            "max_db": self.max_db,
            "threshold_db": self.threshold_db,
            "argmax_x": bx,
            "argmax_y": by,
            "cells": int(self.values.size),
            "present_cells": self.count,
            "mask_cells": int(self.mask.sum()),
            "capped_cells": int(self.capped.sum()),
        }


def build_map(grid: Grid, attenuations: Mapping[tuple[int, int], float]) -> AttenuationMap:
    """Assemble per-cell attenuations (keyed by ``(ix, iy)``) into a map.

    Cells missing from ``attenuations`` or mapped to NaN are absent; they are
    left out of the statistics and never masked.
    """
    nx, ny = grid.shape
    if nx == 0 or ny == 0:
        raise InvalidArgumentError("grid is empty")
    values = np.full((nx, ny), np.nan)
    capped = np.zeros((nx, ny), dtype=bool)
    for (i, j), v in attenuations.items():
        if not (0 <= i < nx and 0 <= j < ny):
            raise InvalidArgumentError(f"cell {(i, j)} outside a {nx}x{ny} grid")
        if v is None or np.isnan(v):
            continue
        values[i, j], capped[i, j] = report_db(float(v))
    present = ~np.isnan(values)
    if not present.any():
        raise InsufficientDataError("no attenuation values to map")
    pv = values[present]
    threshold = _threshold(pv)
    mask = present & (np.nan_to_num(values, nan=-np.inf) >= threshold)
    flat = int(np.nanargmax(values))
    return AttenuationMap(
        grid_x=np.asarray(grid.xs, dtype=float),
        grid_y=np.asarray(grid.ys, dtype=float),
        values=values,
        mask=mask,
        mean_db=float(pv.mean()),
        std_db=float(pv.std()),
        max_db=float(pv.max()),
        min_db=float(pv.min()),
        threshold_db=threshold,
        argmax=(flat // ny, flat % ny),
        capped=capped,
        grid_z=float(grid.z),
    )


def aggregate(values: Sequence[float]) -> dict:
    """Pooled mean/max/min/std and the max-minus-mean improvement."""
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    if v.size == 0:
        raise InsufficientDataError("nothing to aggregate")
    mean = float(v.mean())
    return {
        "mean_db": mean,
        "std_db": float(v.std()),
        "min_db": float(v.min()),
        "max_db": float(v.max()),
        "improvement_db": float(v.max()) - mean,
        "count": int(v.size),
    }
