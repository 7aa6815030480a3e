"""Loudspeaker-position grid sweep and Monte-Carlo study over random scenes."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .anc import FxLmsConfig, propagate, run_fxlms
from .errors import DivergenceError, InsufficientDataError, InvalidConfigError, RoomAncError
from .metrics import AttenuationMap, Grid, aggregate, build_map
from .rir import ImpulseResponse, Position, RoomModel, generate_rir
from .signals import STREAM_PLACEMENT, SignalSpec, make_rng, synthesize

log = logging.getLogger(__name__)

_EPS = 1e-9
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class SweepConfig:
    room: RoomModel
    noise_source: Position | None = None
    microphone: Position | None = None
    grid_spacing: float = 0.11
    grid_z: float = 1.53
    grid_margin: float = 0.1
    exclusion_radius: float = 0.05
    signal: SignalSpec = field(default_factory=SignalSpec)
    fxlms: FxLmsConfig = field(default_factory=FxLmsConfig)
    rir_taps: int = 1000

    def check(self) -> None:
        if not self.grid_spacing > 0:
            raise InvalidConfigError("grid_spacing must be positive")
        if self.grid_margin < 0 or self.exclusion_radius < 0:
            raise InvalidConfigError("grid_margin and exclusion_radius must be nonnegative")
        if not 0 < self.grid_z < self.room.dimensions[2]:
            raise InvalidConfigError(f"grid_z={self.grid_z} is outside the room height")
        for k in range(2):
            extent = self.room.dimensions[k] - 2 * self.grid_margin
            if extent <= 0:
                raise InvalidConfigError("grid_margin leaves no room for a grid")
            if self.grid_spacing > extent + _EPS:
                raise InvalidConfigError(
                    f"grid_spacing {self.grid_spacing} exceeds the usable extent {extent:g} m"
                )
        if int(self.rir_taps) != self.rir_taps or self.rir_taps < 1:
            raise InvalidConfigError("rir_taps must be a positive integer")
        if self.signal.sample_rate != self.room.sample_rate:
            raise InvalidConfigError("signal and room sample rates differ")

    def check_scene(self) -> None:
        self.check()
        if self.noise_source is None or self.microphone is None:
            raise InvalidConfigError("noise_source and microphone must both be set")
        self.room.validate(self.noise_source, "noise source")
        self.room.validate(self.microphone, "microphone")
        if self.noise_source.distance(self.microphone) <= self.exclusion_radius:
            raise InvalidConfigError("noise source and microphone coincide")


@dataclass(frozen=True)
class MonteCarloConfig:
    sweep_template: SweepConfig
    runs: int = 100
    x_interval: tuple[float, float] = (1.0, 6.0)
    y_interval: tuple[float, float] = (1.0, 4.0)
    base_seed: int = 0
    transducer_z: float = 1.5

    def check(self) -> None:
        if int(self.runs) != self.runs or self.runs < 1:
            raise InvalidConfigError("runs must be a positive integer")
        if not 0 <= int(self.base_seed) < 2**64:
            raise InvalidConfigError("base_seed must be an unsigned 64-bit integer")
        self.sweep_template.check()
        for (lo, hi), length in zip((self.x_interval, self.y_interval),
                                    self.sweep_template.room.dimensions[:2]):
            if not lo < hi:
                raise InvalidConfigError(f"empty placement interval [{lo}, {hi})")
            if hi <= 0 or lo >= length:
                raise InvalidConfigError(f"placement interval [{lo}, {hi}) misses the room")

    def placement_bounds(self):
        """Intervals clipped to the room footprint (draws on a wall are redrawn)."""
        dims = self.sweep_template.room.dimensions
        return [(max(lo, 0.0), min(hi, length))
                for (lo, hi), length in zip((self.x_interval, self.y_interval), dims[:2])]


class GridCell(NamedTuple):
    ix: int
    iy: int
    position: Position


def grid_axes(config: SweepConfig) -> Grid:
    config.check()
    axes = []
    for k in range(2):
        extent = config.room.dimensions[k] - 2 * config.grid_margin
        count = int(math.floor(extent / config.grid_spacing + _EPS)) + 1
        axes.append(tuple(config.grid_margin + i * config.grid_spacing for i in range(count)))
    return Grid(axes[0], axes[1], config.grid_z)


def enumerate_grid(config: SweepConfig) -> list[GridCell]:
    """Row-major (x outer, y inner) loudspeaker candidates.

    Nodes within ``exclusion_radius`` of the microphone or noise source are
    dropped.
    """
    grid = grid_axes(config)
    avoid = [p for p in (config.microphone, config.noise_source) if p is not None]
    cells = []
    for i, x in enumerate(grid.xs):
        for j, y in enumerate(grid.ys):
            pos = Position(x, y, grid.z)
            if any(pos.distance(p) <= config.exclusion_radius for p in avoid):
                continue
            cells.append(GridCell(i, j, pos))
    if not cells:
        raise InvalidConfigError("grid is empty after exclusions")
    return cells


@dataclass(frozen=True)
class Scene:
    """Everything shared by the cells of one sweep; immutable once built."""

    room: RoomModel
    microphone: Position
    rir_taps: int
    fxlms: FxLmsConfig
    x: np.ndarray
    primary: ImpulseResponse
    desired: np.ndarray


def prepare_scene(config: SweepConfig) -> Scene:
    config.check_scene()
    primary = generate_rir(config.room, config.noise_source, config.microphone, config.rir_taps)
    x = synthesize(config.signal)
    return Scene(config.room, config.microphone, int(config.rir_taps), config.fxlms,
                 x, primary, propagate(x, primary))


def simulate_cell(scene: Scene, position: Position):
    """Run FxLMS with the loudspeaker at ``position``; returns the AncRunResult."""
    secondary = generate_rir(scene.room, position, scene.microphone, scene.rir_taps)
    return run_fxlms(scene.x, scene.primary, secondary, secondary, scene.fxlms,
                     desired=scene.desired)


def _cell_value(scene: Scene, cell: GridCell) -> tuple[int, int, float, str]:
    try:
        result = simulate_cell(scene, cell.position)
    except RoomAncError as exc:
        return cell.ix, cell.iy, math.nan, f"failed: {exc}"
    if result.diverged:
        return cell.ix, cell.iy, math.nan, "diverged"
    try:
        return cell.ix, cell.iy, result.attenuation_db(), ""
    except RoomAncError as exc:
        return cell.ix, cell.iy, math.nan, f"failed: {exc}"


def _run_chunk(scene: Scene, cells: list[GridCell]):
    return [_cell_value(scene, c) for c in cells]


def default_workers() -> int:
    return os.cpu_count() or 1


def run_sweep(config: SweepConfig, workers: int = 1, executor: ProcessPoolExecutor | None = None,
              scene: Scene | None = None) -> AttenuationMap:
    """Exhaustive sweep of the loudspeaker grid for one noise/microphone scene.

    Cells are independent, so the result does not depend on ``workers``.  The
    returned map's ``info`` dict records instrumentation counters, failed and
    diverged cells.
    """
    if scene is None:
        scene = prepare_scene(config)
        primary_calls = 1
    else:
        config.check_scene()
        primary_calls = 0
    cells = enumerate_grid(config)
    grid = grid_axes(config)
    log.info("sweep: %d cells, %d worker(s)", len(cells), workers)

    outcomes = []
    if executor is None and workers <= 1:
        step = max(1, len(cells) // 10)
        for k, cell in enumerate(cells, 1):
            outcomes.append(_cell_value(scene, cell))
            if k % step == 0 or k == len(cells):
                log.info("sweep: %d/%d cells", k, len(cells))
    else:
        own = executor is None
        pool = ProcessPoolExecutor(max_workers=workers) if own else executor
        try:
            n_chunks = max(1, min(len(cells), 4 * max(workers, 1)))
            chunks = [cells[k::n_chunks] for k in range(n_chunks)]
            futures = [pool.submit(_run_chunk, scene, chunk) for chunk in chunks if chunk]
            for k, fut in enumerate(futures, 1):
                outcomes.extend(fut.result())
                log.info("sweep: %d/%d chunks", k, len(futures))
        finally:
            if own:
                pool.shutdown()

    values = {(i, j): v for i, j, v, _ in outcomes}
    problems = sorted((i, j, msg) for i, j, _, msg in outcomes if msg)
    try:
        amap = build_map(grid, values)
    except InsufficientDataError:
        if all(m == "diverged" for _, _, m in problems):
            raise DivergenceError("every cell of the sweep diverged") from None
        raise InsufficientDataError("every cell of the sweep failed or diverged") from None
    amap.info.update({
        "primary_rir_calls": primary_calls,
        "secondary_rir_calls": len(cells),
        "excluded_cells": grid.shape[0] * grid.shape[1] - len(cells),
        "diverged_cells": [(i, j) for i, j, m in problems if m == "diverged"],
        "failed_cells": [(i, j, m) for i, j, m in problems if m != "diverged"],
    })
    return amap


@dataclass(frozen=True)
class MonteCarloRecord:
    run_index: int
    seed: int
    noise_source: Position
    microphone: Position
    best_position: Position
    best_db: float
    mean_db: float
    redraws: int
    map: AttenuationMap = field(repr=False, compare=False)


@dataclass
class MonteCarloResult:
    records: list[MonteCarloRecord]
    failures: list[tuple[int, str]]
    aggregate: dict


def draw_scene(config: MonteCarloConfig, run_index: int) -> tuple[Position, Position, int]:
    """Noise source and microphone for one run, drawn from seed ``base_seed + run_index``.

    Invalid draws (on a wall, or the two transducers within the exclusion
    radius) are rejected and redrawn from the same stream.
    """
    seed = int(config.base_seed) + run_index
    rng = make_rng(seed, STREAM_PLACEMENT)
    tmpl = config.sweep_template
    (xlo, xhi), (ylo, yhi) = config.placement_bounds()
    z = config.transducer_z
    for attempt in range(MAX_REDRAWS):
        nx, mx = rng.uniform(xlo, xhi, size=2)
        ny, my = rng.uniform(ylo, yhi, size=2)
        noise, mic = Position(float(nx), float(ny), z), Position(float(mx), float(my), z)
        if (tmpl.room.contains(noise) and tmpl.room.contains(mic)
                and noise.distance(mic) > tmpl.exclusion_radius):
            return noise, mic, attempt
        log.warning("run %d: rejected placement noise=%s mic=%s, redrawing",
                    run_index, tuple(noise), tuple(mic))
    raise InvalidConfigError(f"run {run_index}: no valid placement after {MAX_REDRAWS} draws")


def run_monte_carlo(config: MonteCarloConfig, workers: int = 1) -> MonteCarloResult:
    """Independent sweeps over randomly placed noise source / microphone pairs.

    Run ``i`` uses seed ``base_seed + i`` for both the placement and the
    source-signal noise.  Aggregates pool every per-position attenuation of
    every successful run.
    """
    config.check()
    records, failures = [], []
    all_diverged = True
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i in range(int(config.runs)):
            seed = int(config.base_seed) + i
            try:
                noise, mic, redraws = draw_scene(config, i)
                sweep_cfg = replace(config.sweep_template, noise_source=noise, microphone=mic,
                                    signal=replace(config.sweep_template.signal, seed=seed))
                amap = run_sweep(sweep_cfg, workers=workers, executor=pool)
            except RoomAncError as exc:
                log.warning("run %d failed: %s", i, exc)
                failures.append((i, str(exc)))
                all_diverged &= isinstance(exc, DivergenceError)
                continue
            bx, by = amap.argmax_xy
            records.append(MonteCarloRecord(
                run_index=i, seed=seed, noise_source=noise, microphone=mic,
                best_position=Position(bx, by, amap.grid_z),
                best_db=amap.max_db, mean_db=amap.mean_db, redraws=redraws, map=amap,
            ))
            log.info("run %d/%d: best %.2f dB, mean %.2f dB", i + 1, config.runs, amap.max_db, amap.mean_db)
    finally:
        if pool is not None:
            pool.shutdown()
    if not records:
        if all_diverged:
            raise DivergenceError("every Monte-Carlo run diverged")
        raise InsufficientDataError("every Monte-Carlo run failed")
    pooled = np.concatenate([r.map.values[r.map.present] for r in records])
    return MonteCarloResult(records, failures, aggregate(pooled))
