"""Experiment configuration: presets, JSON files and dotted-key overrides.

A configuration is a nested dict of plain JSON values.  ``resolve`` layers
preset defaults, an optional file and command-line overrides, then
``build_*`` turns the result into typed objects.  The resolved dict is what
gets written next to every output, so feeding it back via ``--config``
reproduces a run exactly.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

from .anc import FxLmsConfig
from .errors import InvalidConfigError, RoomAncError
from .rir import Position, RoomModel
from .signals import SignalSpec
from .sweep import MonteCarloConfig, SweepConfig

STUDIES = ("rir", "signal", "simulate", "sweep", "montecarlo")

PAPER = {
    "preset": "paper",
    "room": {
        "dimensions": [6.0, 4.0, 3.0],
        "reflection_coeffs": [0.8, 0.7, 0.6, 0.5, 0.4, 0.5],
        "sound_speed": 343.0,
        "sample_rate": 2000.0,
        "expected_t60": 0.4,
    },
    "signal": {
        "fundamental": 30.0,
        "sine_coeffs": [-1.0, -0.5, 0.1],
        "cosine_coeffs": [2.0, 1.0, 0.5],
        "noise_variance": 0.1,
        "duration": 100.0,
        "seed": 0,
    },
    "fxlms": {"filter_length": 350, "step_size": 1e-5},
    "geometry": {
        "noise_source": [3.0, 2.0, 1.5],
        "microphone": [1.0, 3.0, 1.5],
        "antinoise": [1.1, 3.1, 1.53],
    },
    "sweep": {
        "grid_spacing": 0.11,
        "grid_z": 1.53,
        "grid_margin": 0.1,
        "exclusion_radius": 0.05,
        "rir_taps": 1000,
    },
    "montecarlo": {
        "runs": 100,
        "x_interval": [1.0, 6.0],
        "y_interval": [1.0, 4.0],
        "transducer_z": 1.5,
        "base_seed": 0,
    },
}

_DESK_CHANGES = {
    "preset": "desk",
    "signal": {"duration": 10.0},
    "sweep": {"grid_spacing": 0.5},
    "montecarlo": {"runs": 10},
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


PRESETS = {"paper": PAPER, "desk": _merge(PAPER, _DESK_CHANGES)}


def preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise InvalidConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def load(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfigError("config file must hold a JSON object")
    return data


def parse_override(text: str) -> tuple[list[str], object]:
    """``"sweep.grid_spacing=0.25"`` -> (["sweep", "grid_spacing"], 0.25).

    Values are parsed as JSON when possible, otherwise kept as strings.
    """
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise InvalidConfigError(f"override must look like key.path=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def set_path(cfg: dict, path: list[str], value) -> None:
    node = cfg
    for part in path[:-1]:
        if not isinstance(node.get(part), dict):
            raise InvalidConfigError(f"unknown config section {'.'.join(path[:-1])!r}")
        node = node[part]
    if path[-1] not in node:
        raise InvalidConfigError(f"unknown config key {'.'.join(path)!r}")
    node[path[-1]] = value


def resolve(preset_name: str | None = None, path=None, overrides=()) -> dict:
    """Preset defaults, then the file (whose own ``preset`` key wins), then overrides."""
    file_cfg = load(path) if path is not None else {}
    name = preset_name or file_cfg.get("preset") or "paper"
    cfg = _merge(preset(name), file_cfg)
    cfg["preset"] = name
    for item in overrides:
        keys, value = parse_override(item) if isinstance(item, str) else item
        set_path(cfg, keys, value)
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _position(value, what) -> Position:
    try:
        x, y, z = (float(v) for v in value)
    except (TypeError, ValueError):
        raise InvalidConfigError(f"{what} must be a list of three numbers, got {value!r}") from None
    return Position(x, y, z)


def _wrap(fn):
    def inner(cfg, *args, **kwargs):
        try:
            return fn(cfg, *args, **kwargs)
        except InvalidConfigError:
            raise
        except (RoomAncError, KeyError, TypeError, ValueError) as exc:
            raise InvalidConfigError(f"bad configuration: {exc}") from None
    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


@_wrap
def build_room(cfg: dict) -> RoomModel:
    r = cfg["room"]
    return RoomModel(tuple(r["dimensions"]), tuple(r["reflection_coeffs"]),
                     float(r["sound_speed"]), float(r["sample_rate"]))


@_wrap
def build_signal(cfg: dict) -> SignalSpec:
    s = cfg["signal"]
    return SignalSpec(
        fundamental=float(s["fundamental"]),
        sine_coeffs=tuple(s["sine_coeffs"]),
        cosine_coeffs=tuple(s["cosine_coeffs"]),
        noise_variance=float(s["noise_variance"]),
        sample_rate=float(cfg["room"]["sample_rate"]),
        duration=float(s["duration"]),
        seed=int(s["seed"]),
    )


@_wrap
def build_fxlms(cfg: dict) -> FxLmsConfig:
    f = cfg["fxlms"]
    w0 = f.get("initial_weights")
    return FxLmsConfig(int(f["filter_length"]), float(f["step_size"]),
                       tuple(w0) if w0 is not None else None)


@_wrap
def geometry(cfg: dict, key: str) -> Position:
    return _position(cfg["geometry"][key], key)


@_wrap
def build_sweep(cfg: dict, with_scene: bool = True) -> SweepConfig:
    s = cfg["sweep"]
    sc = SweepConfig(
        room=build_room(cfg),
        noise_source=geometry(cfg, "noise_source") if with_scene else None,
        microphone=geometry(cfg, "microphone") if with_scene else None,
        grid_spacing=float(s["grid_spacing"]),
        grid_z=float(s["grid_z"]),
        grid_margin=float(s["grid_margin"]),
        exclusion_radius=float(s["exclusion_radius"]),
        signal=build_signal(cfg),
        fxlms=build_fxlms(cfg),
        rir_taps=int(s["rir_taps"]),
    )
    sc.check()
    return sc


@_wrap
def build_montecarlo(cfg: dict) -> MonteCarloConfig:
    m = cfg["montecarlo"]
    mc = MonteCarloConfig(
        sweep_template=build_sweep(cfg, with_scene=False),
        runs=int(m["runs"]),
        x_interval=tuple(float(v) for v in m["x_interval"]),
        y_interval=tuple(float(v) for v in m["y_interval"]),
        base_seed=int(m["base_seed"]),
        transducer_z=float(m["transducer_z"]),
    )
    mc.check()
    return mc
