"""Source excitation and spectral estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import InvalidArgumentError, InvalidSpecError

#: Generator used for every random draw in the package.
RNG_NAME = "numpy.random.PCG64 seeded by SeedSequence(seed, spawn_key=(stream,))"

WELCH_SEGMENT = 4096
WELCH_OVERLAP = WELCH_SEGMENT // 2


#: Independent sub-streams drawn from one seed.
STREAM_NOISE = 0
STREAM_PLACEMENT = 1


def make_rng(seed: int, stream: int = STREAM_NOISE) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(stream,))))


@dataclass(frozen=True)
class SignalSpec:
    """Harmonic series plus white Gaussian noise.

    Coefficient ``k`` (0-based) multiplies the harmonic at ``(k + 1) * fundamental``.
    """

    fundamental: float = 30.0
    sine_coeffs: tuple[float, ...] = (-1.0, -0.5, 0.1)
    cosine_coeffs: tuple[float, ...] = (2.0, 1.0, 0.5)
    noise_variance: float = 0.1
    sample_rate: float = 2000.0
    duration: float = 100.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sine_coeffs", tuple(float(c) for c in self.sine_coeffs))
        object.__setattr__(self, "cosine_coeffs", tuple(float(c) for c in self.cosine_coeffs))
        if len(self.sine_coeffs) != len(self.cosine_coeffs) or not self.sine_coeffs:
            raise InvalidSpecError("sine and cosine coefficient lists must have equal, nonzero length")
        if self.sample_rate <= 0 or self.duration <= 0:
            raise InvalidSpecError("sample_rate and duration must be positive")
        if self.noise_variance < 0:
            raise InvalidSpecError("noise_variance must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpecError("seed must be an unsigned 64-bit integer")
        if self.fundamental * self.num_harmonics >= self.sample_rate / 2:
            raise InvalidSpecError(
                f"highest harmonic {self.fundamental * self.num_harmonics} Hz is not below "
                f"Nyquist ({self.sample_rate / 2} Hz)"
            )

    @property
    def num_harmonics(self) -> int:
        return len(self.sine_coeffs)

    @property
    def num_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))


def deterministic_part(spec: SignalSpec) -> np.ndarray:
    n = np.arange(spec.num_samples)
    x = np.zeros(spec.num_samples)
    for k, (a, b) in enumerate(zip(spec.sine_coeffs, spec.cosine_coeffs), start=1):
        phase = 2.0 * np.pi * k * spec.fundamental * n / spec.sample_rate
        x += a * np.sin(phase) + b * np.cos(phase)
    return x


def synthesize(spec: SignalSpec) -> np.ndarray:
    """Fourier-synthesised reference signal x(n) with additive Gaussian noise."""
    x = deterministic_part(spec)
    if spec.noise_variance > 0:
        x += make_rng(int(spec.seed)).normal(0.0, np.sqrt(spec.noise_variance), spec.num_samples)
    return x


def psd(x, sample_rate: float, segment: int = WELCH_SEGMENT):
    """Welch power spectral density.

    Hann window, 50% overlap.  Returns ``(frequencies_hz, power_db)`` with power
    in dB re 1 unit^2/Hz.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < segment:
        raise InvalidArgumentError(f"need at least {segment} samples for a PSD, got {x.size}")
    freqs, pxx = sps.welch(x, fs=sample_rate, window="hann", nperseg=segment,
                           noverlap=segment // 2, detrend=False, scaling="density")
    with np.errstate(divide="ignore"):
        return freqs, 10.0 * np.log10(pxx)


def power_at(freqs, power_db, target_hz: float, tolerance_hz: float = 1.0) -> float:
    """Largest PSD value (dB) within ``tolerance_hz`` of ``target_hz``."""
    band = np.abs(np.asarray(freqs) - target_hz) <= tolerance_hz
    if not band.any():
        raise InvalidArgumentError(f"no PSD bin within {tolerance_hz} Hz of {target_hz} Hz")
    return float(np.max(np.asarray(power_db)[band]))
