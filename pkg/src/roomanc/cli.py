"""Command-line front end.

Data goes to files under ``--out`` (and short ``key=value`` results to
stdout); progress and diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import __version__, config as cfgmod, export
from .errors import (
    DivergenceError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidGeometryError,
    RoomAncError,
)
from .rir import energy_decay_curve, estimate_t60, generate_rir
from .signals import RNG_NAME, WELCH_SEGMENT, psd, synthesize
from .sweep import default_workers, prepare_scene, run_monte_carlo, run_sweep, simulate_cell

log = logging.getLogger("roomanc")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3
EXIT_DIVERGED = 4


def _triple(text: str) -> list[float]:
    parts = text.replace(" ", "").split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z but got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in {text!r}") from None


def _emit(**values) -> None:
    for key, value in values.items():
        if isinstance(value, float):
            value = export.fmt(value)
        print(f"{key}={value}")


def _prepare_out(args, cfg) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidConfigError(f"cannot create output directory {out}: {exc}") from None
    export.write_json(out / "config.json", cfg)
    return out


def _write_metadata(out: Path, cfg: dict, args, started: float, seeds: dict) -> None:
    export.write_json(out / "metadata.json", {
        "command": args.command,
        "config_hash": cfgmod.config_hash(cfg),
        "rng": RNG_NAME,
        "seeds": seeds,
        "workers": getattr(args, "workers", 1),
        "wall_clock_s": time.time() - started,
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
        "version": __version__,
    })


def cmd_rir(args, cfg) -> int:
    if args.source is not None:
        cfg["geometry"]["noise_source"] = args.source
    if args.receiver is not None:
        cfg["geometry"]["microphone"] = args.receiver
    if args.anechoic:
        cfg["room"]["reflection_coeffs"] = [0.0] * 6
    room = cfgmod.build_room(cfg)
    src = cfgmod.geometry(cfg, "noise_source")
    rcv = cfgmod.geometry(cfg, "microphone")
    taps = int(cfg["sweep"]["rir_taps"])
    ir = generate_rir(room, src, rcv, taps)
    out = _prepare_out(args, cfg)
    export.write_column(out / "rir.csv", ir.taps)
    edc = energy_decay_curve(ir)
    export.write_column(out / "edc.csv", edc)
    try:
        t60 = estimate_t60(edc, room.sample_rate)
    except RoomAncError as exc:
        log.warning("T60 not measurable: %s", exc)
        t60 = float("nan")
    _emit(taps=taps, t60_s=t60, expected_t60_s=float(cfg["room"].get("expected_t60", float("nan"))))
    return EXIT_OK


def cmd_signal(args, cfg) -> int:
    spec = cfgmod.build_signal(cfg)
    x = synthesize(spec)
    out = _prepare_out(args, cfg)
    export.write_column(out / "signal.csv", x)
    if x.size >= WELCH_SEGMENT:
        export.write_psd(out / "psd.csv", *psd(x, spec.sample_rate))
    else:
        log.warning("signal shorter than one Welch segment; PSD skipped")
    _emit(samples=x.size, seed=spec.seed)
    return EXIT_OK


def cmd_simulate(args, cfg) -> int:
    started = time.time()
    if args.antinoise is not None:
        cfg["geometry"]["antinoise"] = args.antinoise
    if args.step_size is not None:
        cfg["fxlms"]["step_size"] = args.step_size
    sweep_cfg = cfgmod.build_sweep(cfg)
    anti = cfgmod.geometry(cfg, "antinoise")
    scene = prepare_scene(sweep_cfg)
    result = simulate_cell(scene, anti)
    out = _prepare_out(args, cfg)
    export.write_trace(out / "trace.csv", result.desired, result.error)
    summary = {"diverged": result.diverged, "samples": int(result.error.size)}
    if result.diverged:
        _write_metadata(out, cfg, args, started, {"signal": sweep_cfg.signal.seed})
        export.write_json(out / "summary.json", summary)
        log.error("FxLMS diverged after %d samples", result.error.size)
        _emit(diverged=True, samples=result.error.size)
        return EXIT_DIVERGED
    fs = sweep_cfg.room.sample_rate
    if result.error.size >= WELCH_SEGMENT:
        export.write_psd(out / "psd_desired.csv", *psd(result.desired, fs))
        export.write_psd(out / "psd_error.csv", *psd(result.error, fs))
    a_db = result.attenuation_db()
    summary["attenuation_db"] = a_db
    export.write_json(out / "summary.json", summary)
    _write_metadata(out, cfg, args, started, {"signal": sweep_cfg.signal.seed})
    _emit(attenuation_db=a_db)
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    started = time.time()
    sweep_cfg = cfgmod.build_sweep(cfg)
    amap = run_sweep(sweep_cfg, workers=args.workers)
    out = _prepare_out(args, cfg)
    export.write_map(out, amap)
    summary = amap.summary()
    summary["diverged_cells"] = [list(c) for c in amap.info["diverged_cells"]]
    summary["failed_cells"] = [list(c) for c in amap.info["failed_cells"]]
    export.write_json(out / "summary.json", summary)
    _write_metadata(out, cfg, args, started, {"signal": sweep_cfg.signal.seed})
    _emit(**{k: summary[k] for k in ("mean_db", "std_db", "min_db", "max_db", "threshold_db",
                                     "argmax_x", "argmax_y", "present_cells")})
    return EXIT_OK


def cmd_montecarlo(args, cfg) -> int:
    started = time.time()
    mc = cfgmod.build_montecarlo(cfg)
    result = run_monte_carlo(mc, workers=args.workers)
    out = _prepare_out(args, cfg)
    maps = out / "maps"
    maps.mkdir(exist_ok=True)
    recs = result.records
    export.write_table(
        out / "montecarlo_summary.csv",
        ("run_index", "noise_x", "noise_y", "mic_x", "mic_y", "best_x", "best_y", "best_db", "mean_db"),
        (
            [r.run_index for r in recs],
            [r.noise_source.x for r in recs], [r.noise_source.y for r in recs],
            [r.microphone.x for r in recs], [r.microphone.y for r in recs],
            [r.best_position.x for r in recs], [r.best_position.y for r in recs],
            [r.best_db for r in recs], [r.mean_db for r in recs],
        ),
    )
    for r in recs:
        export.write_map(maps, r.map, prefix=f"run_{r.run_index:03d}")
    report = dict(result.aggregate)
    report["runs_ok"] = len(recs)
    report["runs_failed"] = [{"run_index": i, "reason": msg} for i, msg in result.failures]
    export.write_json(out / "aggregate.json", report)
    _write_metadata(out, cfg, args, started,
                    {"base_seed": mc.base_seed, "run_seeds": [r.seed for r in recs]})
    _emit(runs=len(recs), mean_db=report["mean_db"], max_db=report["max_db"],
          improvement_db=report["improvement_db"])
    return EXIT_OK


COMMANDS = {
    "rir": cmd_rir,
    "signal": cmd_signal,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "montecarlo": cmd_montecarlo,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file")
    common.add_argument("--preset", choices=sorted(cfgmod.PRESETS), help="default values (paper)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, help="signal seed and Monte-Carlo base seed")
    common.add_argument("--workers", type=int, default=default_workers(),
                        help="worker processes for sweeps (default: CPU count)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. sweep.grid_spacing=0.25")
    common.add_argument("-q", "--quiet", action="store_true", help="only warnings on stderr")

    parser = argparse.ArgumentParser(prog="roomanc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rir", parents=[common], help="room impulse response and decay curve")
    p.add_argument("--source", type=_triple, help="x,y,z (default: geometry.noise_source)")
    p.add_argument("--receiver", type=_triple, help="x,y,z (default: geometry.microphone)")
    p.add_argument("--anechoic", action="store_true", help="set every reflection coefficient to 0")

    sub.add_parser("signal", parents=[common], help="source signal and its PSD")

    p = sub.add_parser("simulate", parents=[common], help="one FxLMS run")
    p.add_argument("--antinoise", type=_triple, help="x,y,z of the loudspeaker")
    p.add_argument("--step-size", type=float, help="shortcut for --set fxlms.step_size=...")

    sub.add_parser("sweep", parents=[common], help="loudspeaker grid sweep")
    p = sub.add_parser("montecarlo", parents=[common], help="Monte-Carlo study of sweeps")
    p.add_argument("--runs", type=int, help="shortcut for --set montecarlo.runs=...")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.resolve(args.preset, args.config, args.overrides)
        if args.seed is not None:
            cfg["signal"]["seed"] = args.seed
            cfg["montecarlo"]["base_seed"] = args.seed
        if getattr(args, "runs", None) is not None:
            cfg["montecarlo"]["runs"] = args.runs
        if args.workers < 1:
            raise InvalidConfigError("--workers must be at least 1")
        return COMMANDS[args.command](args, cfg)
    except InvalidGeometryError as exc:
        log.error("geometry error: %s", exc)
        return EXIT_GEOMETRY
    except DivergenceError as exc:
        log.error("%s", exc)
        return EXIT_DIVERGED
    except InvalidConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except InsufficientDataError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    except RoomAncError as exc:
        # remaining argument/spec errors come from bad configuration values
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
