import logging
import math
from dataclasses import replace

import numpy as np
import pytest

import roomanc.sweep as sweep_mod
from roomanc.anc import FxLmsConfig
from roomanc.errors import DivergenceError, InvalidConfigError
from roomanc.rir import Position
from roomanc.signals import SignalSpec
from roomanc.sweep import (
    MonteCarloConfig,
    SweepConfig,
    draw_scene,
    enumerate_grid,
    grid_axes,
    prepare_scene,
    run_monte_carlo,
    run_sweep,
    simulate_cell,
)


@pytest.fixture
def small(room, noise_source, microphone):
    # coarse, short configuration so each sweep runs in a couple of seconds
    return SweepConfig(room, noise_source, microphone, grid_spacing=1.0,
                       signal=SignalSpec(duration=2.0), fxlms=FxLmsConfig(64, 1e-4), rir_taps=200)


def test_full_scale_grid_dimensions(room):
    g = grid_axes(SweepConfig(room))
    assert g.shape == (53, 35)
    assert g.xs[0] == pytest.approx(0.1) and g.xs[-1] <= 5.9 + 1e-9
    assert g.ys[-1] <= 3.9 + 1e-9


def test_exact_fit_includes_far_margin(room):
    g = grid_axes(SweepConfig(room, grid_spacing=0.2))
    assert g.xs[-1] == pytest.approx(5.9) and len(g.xs) == 30


def test_spacing_larger_than_room_is_rejected(room):
    with pytest.raises(InvalidConfigError):
        grid_axes(SweepConfig(room, grid_spacing=4.0))


@pytest.mark.parametrize("kwargs", [dict(grid_spacing=0.0), dict(grid_z=3.5), dict(grid_margin=2.5),
                                    dict(rir_taps=0), dict(signal=SignalSpec(sample_rate=8000.0))])
def test_invalid_sweep_configs(room, kwargs):
    with pytest.raises(InvalidConfigError):
        SweepConfig(room, **kwargs).check()


def test_microphone_on_a_node_excludes_only_that_node(room, noise_source):
    mic = Position(1.0, 3.1, 1.53)
    cfg = SweepConfig(room, noise_source, mic, grid_spacing=0.3)
    g = grid_axes(cfg)
    cells = enumerate_grid(cfg)
    assert len(cells) == g.shape[0] * g.shape[1] - 1
    missing = {(i, j) for i in range(g.shape[0]) for j in range(g.shape[1])} - {(c.ix, c.iy) for c in cells}
    assert missing == {(3, 10)}


def test_enumeration_order_is_row_major(small):
    cells = enumerate_grid(small)
    keys = [(c.ix, c.iy) for c in cells]
    assert keys == sorted(keys)


def test_coincident_scene_rejected(room):
    cfg = SweepConfig(room, Position(2, 2, 1.5), Position(2.01, 2, 1.5))
    with pytest.raises(InvalidConfigError):
        cfg.check_scene()


def test_small_sweep(small):
    amap = run_sweep(small)
    g = grid_axes(small)
    assert amap.values.shape == g.shape
    assert amap.count == g.shape[0] * g.shape[1] - amap.info["excluded_cells"]
    assert np.all(np.isfinite(amap.values[amap.present]))
    assert amap.min_db <= amap.mean_db <= amap.max_db
    assert amap.mask[amap.argmax]
    assert amap.info["primary_rir_calls"] == 1
    assert amap.info["secondary_rir_calls"] == amap.count
    assert amap.info["diverged_cells"] == [] and amap.info["failed_cells"] == []


def test_cells_are_independent(small):
    amap = run_sweep(small)
    scene = prepare_scene(small)
    for cell in enumerate_grid(small)[::7]:
        alone = simulate_cell(scene, cell.position).attenuation_db()
        assert alone == amap.values[cell.ix, cell.iy]


def test_primary_rir_generated_once(monkeypatch, small):
    calls = []
    real = sweep_mod.generate_rir

    def counting(room, source, receiver, taps, **kw):
        calls.append((tuple(source), tuple(receiver)))
        return real(room, source, receiver, taps, **kw)

    monkeypatch.setattr(sweep_mod, "generate_rir", counting)
    amap = run_sweep(small)
    noise = tuple(small.noise_source)
    assert sum(1 for s, _ in calls if s == noise) == 1
    assert len(calls) == 1 + amap.count


def test_worker_count_does_not_change_result(small):
    a = run_sweep(small, workers=1)
    b = run_sweep(small, workers=3)
    assert a.values.tobytes() == b.values.tobytes()
    assert np.array_equal(a.mask, b.mask)


def test_diverged_cells_are_missing_not_nan_poisoned(small):
    amap = run_sweep(replace(small, fxlms=FxLmsConfig(64, 1.0)))
    diverged = amap.info["diverged_cells"]
    assert diverged
    for ij in diverged:
        assert not amap.present[ij] and not amap.mask[ij]
    assert math.isfinite(amap.mean_db) and math.isfinite(amap.threshold_db)


def test_sweep_where_every_cell_diverges(small):
    with pytest.raises(DivergenceError):
        run_sweep(replace(small, fxlms=FxLmsConfig(64, 1e6)))


def monte_carlo_config(room, runs=3, **kwargs):
    tmpl = SweepConfig(room, grid_spacing=1.5, signal=SignalSpec(duration=1.0),
                       fxlms=FxLmsConfig(32, 1e-4), rir_taps=150)
    return MonteCarloConfig(tmpl, runs=runs, base_seed=42, **kwargs)


def test_monte_carlo_reproducible(room):
    cfg = monte_carlo_config(room)
    a, b = run_monte_carlo(cfg), run_monte_carlo(cfg)
    assert [r.seed for r in a.records] == [42, 43, 44]
    for ra, rb in zip(a.records, b.records):
        assert ra == rb
        assert ra.map.values.tobytes() == rb.map.values.tobytes()
        assert 1 <= ra.noise_source.x < 6 and 1 <= ra.noise_source.y < 4
        assert ra.noise_source.z == 1.5
    assert a.aggregate == b.aggregate
    assert a.aggregate["improvement_db"] == pytest.approx(a.aggregate["max_db"] - a.aggregate["mean_db"])
    assert a.aggregate["count"] == sum(r.map.count for r in a.records)


def test_runs_differ_between_seeds(room):
    cfg = monte_carlo_config(room, runs=2)
    r0, r1 = run_monte_carlo(cfg).records
    assert r0.noise_source != r1.noise_source


def test_rejected_placements_are_redrawn_and_logged(room, caplog):
    # a tiny placement window makes collisions within the exclusion radius common
    cfg = monte_carlo_config(room, x_interval=(2.0, 2.06), y_interval=(2.0, 2.06))
    caplog.set_level(logging.WARNING, logger="roomanc.sweep")
    redrawn = [i for i in range(20) if draw_scene(cfg, i)[2] > 0]
    assert redrawn
    assert any("rejected placement" in rec.message for rec in caplog.records)
    noise, mic, _ = draw_scene(cfg, redrawn[0])
    assert noise.distance(mic) > cfg.sweep_template.exclusion_radius
    assert draw_scene(cfg, redrawn[0]) == (noise, mic, draw_scene(cfg, redrawn[0])[2])


def test_zero_runs_rejected(room):
    with pytest.raises(InvalidConfigError):
        monte_carlo_config(room, runs=0).check()


def test_placement_outside_room_rejected(room):
    with pytest.raises(InvalidConfigError):
        monte_carlo_config(room, x_interval=(7.0, 9.0)).check()
    assert math.isclose(monte_carlo_config(room, x_interval=(1.0, 8.0)).placement_bounds()[0][1], 6.0)
