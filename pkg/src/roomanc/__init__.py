"""Room-acoustic FxLMS active noise control simulator.

Image-source room impulse responses feed a feedforward FxLMS controller;
sweeping the anti-noise loudspeaker over a grid maps where cancellation
works best.
"""

__version__ = "0.1.0"

from .anc import AncRunResult, FxLmsConfig, propagate, run_fxlms
from .metrics import AttenuationMap, Grid, build_map, estimated_attenuation, threshold_top
from .rir import (
    ImpulseResponse,
    Position,
    RoomModel,
    energy_decay_curve,
    estimate_t60,
    generate_rir,
)
from .signals import SignalSpec, psd, synthesize
from .sweep import MonteCarloConfig, SweepConfig, enumerate_grid, run_monte_carlo, run_sweep

__all__ = [
    "AncRunResult", "AttenuationMap", "FxLmsConfig", "Grid", "ImpulseResponse",
    "MonteCarloConfig", "Position", "RoomModel", "SignalSpec", "SweepConfig",
    "build_map", "energy_decay_curve", "enumerate_grid", "estimate_t60",
    "estimated_attenuation", "generate_rir", "propagate", "psd", "run_fxlms",
    "run_monte_carlo", "run_sweep", "synthesize", "threshold_top",
]
