"""Image-source room impulse responses for shoebox rooms.

Every image within the requested window is summed; each arrival is spread
over neighbouring taps with a Hann-windowed sinc so that non-integer delays
keep their exact arrival time.  No high-pass filter is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import (
    DegenerateInputError,
    InsufficientDecayError,
    InvalidArgumentError,
    InvalidGeometryError,
)

#: Half-width (in samples) of the fractional-delay kernel.
SINC_HALF_WIDTH = 16

#: Minimum source-receiver separation in metres.
MIN_SEPARATION = 0.01



@dataclass(frozen=True)
class RoomModel:
    """Shoebox room.

    ``reflection_coeffs`` are ordered (x=0, x=Lx, y=0, y=Ly, z=0, z=Lz).
    """

    dimensions: tuple[float, float, float]
    reflection_coeffs: tuple[float, float, float, float, float, float]
    sound_speed: float = 343.0
    sample_rate: float = 2000.0

    def __post_init__(self):
        dims = tuple(float(v) for v in self.dimensions)
        betas = tuple(float(v) for v in self.reflection_coeffs)
        if len(dims) != 3 or not all(d > 0 and math.isfinite(d) for d in dims):
            raise InvalidArgumentError(f"room dimensions must be 3 positive values, got {dims}")
        if len(betas) != 6 or not all(0.0 <= b <= 1.0 for b in betas):
            raise InvalidArgumentError(
                f"need 6 reflection coefficients in [0, 1], got {betas}"
            )
        if not (self.sound_speed > 0 and self.sample_rate > 0):
            raise InvalidArgumentError("sound_speed and sample_rate must be positive")
        object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "reflection_coeffs", betas)
        object.__setattr__(self, "sound_speed", float(self.sound_speed))
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def metres_per_sample(self) -> float:
        return self.sound_speed / self.sample_rate

    def contains(self, p: "Position") -> bool:
        """True when ``p`` is strictly inside the room."""
        return all(0.0 < c < d for c, d in zip(p, self.dimensions))

    def validate(self, p: "Position", what: str = "position") -> None:
        if not self.contains(p):
            raise InvalidGeometryError(
                f"{what} {tuple(p)} is not strictly inside room {self.dimensions}"
            )


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def distance(self, other: "Position") -> float:
        return math.dist(tuple(self), tuple(other))


@dataclass(frozen=True, eq=False)
class ImpulseResponse:
    taps: np.ndarray
    sample_rate: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 1 or taps.size == 0:
            raise InvalidArgumentError("impulse response needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise InvalidArgumentError("impulse response contains non-finite taps")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    def __len__(self):
        return self.taps.size

    @property
    def energy(self) -> float:
        return float(np.dot(self.taps, self.taps))

    @classmethod
    def unit(cls, sample_rate: float = 2000.0) -> "ImpulseResponse":
        return cls(np.array([1.0]), sample_rate)


def fractional_delay_kernel(t: np.ndarray, half_width: int = SINC_HALF_WIDTH) -> np.ndarray:
    """Hann-windowed sinc evaluated at offsets ``t`` (samples) from the arrival."""
    t = np.asarray(t, dtype=float)
    window = 0.5 * (1.0 + np.cos(np.pi * t / half_width))
    return np.where(np.abs(t) < half_width, window * np.sinc(t), 0.0)


@numba.njit(cache=True)
def _deposit(delay, amp, num_taps, hw):
    # sin(pi t) only flips sign between consecutive taps and the window's
    # cosine advances by a fixed angle, so both are updated by recurrence.
    # Offsets are formed as (integer - frac) with |frac| <= 1/2 so that
    # sin(pi t) keeps full relative precision near integer delays.
    out = np.zeros(num_taps)
    step_c = np.cos(np.pi / hw)
    step_s = np.sin(np.pi / hw)
    for i in range(delay.size):
        base = int(np.floor(delay[i] + 0.5))
        frac = delay[i] - base
        t = -hw - frac
        # sin(pi (m - frac)) = -(-1)^m sin(pi frac)
        sin_t = np.sin(np.pi * frac)
        if hw % 2 == 0:
            sin_t = -sin_t
        wc = np.cos(np.pi * t / hw)
        ws = np.sin(np.pi * t / hw)
        half_amp = 0.5 * amp[i]
        for m in range(-hw, hw + 1):
            k = base + m
            t = m - frac
            if 0 <= k < num_taps and abs(t) < hw:
                if t == 0.0:
                    sinc = 1.0
                else:
                    sinc = sin_t / (np.pi * t)
                out[k] += half_amp * (1.0 + wc) * sinc
            sin_t = -sin_t
            wc, ws = wc * step_c - ws * step_s, ws * step_c + wc * step_s
    return out


def _axis_images(length, src, rcv, reach, beta_lo, beta_hi):
    # Offsets of every 1-D image of the source (relative to the receiver)
    # whose absolute offset can fall inside ``reach``, with bounce counts.
    m_max = int(math.ceil(reach / (2.0 * length))) + 1
    m = np.repeat(np.arange(-m_max, m_max + 1), 2)
    q = np.tile([0, 1], 2 * m_max + 1)
    offset = (1 - 2 * q) * src - rcv + 2.0 * m * length
    hits_lo = np.abs(m - q)
    hits_hi = np.abs(m)
    keep = np.abs(offset) <= reach
    offset, hits_lo, hits_hi = offset[keep], hits_lo[keep], hits_hi[keep]
    gain = np.power(beta_lo, hits_lo) * np.power(beta_hi, hits_hi)
    return offset, gain, hits_lo + hits_hi


def image_sources(room: RoomModel, source: Position, receiver: Position,
                  max_distance: float, max_order: int | None = None):
    """Distances, reflection gains and orders of all images within ``max_distance``."""
    betas = room.reflection_coeffs
    axes = [
        _axis_images(room.dimensions[k], tuple(source)[k], tuple(receiver)[k],
                     max_distance, betas[2 * k], betas[2 * k + 1])
        for k in range(3)
    ]
    (ox, gx, nx), (oy, gy, ny), (oz, gz, nz) = axes
    dist = np.sqrt(ox[:, None, None] ** 2 + oy[None, :, None] ** 2 + oz[None, None, :] ** 2)
    gain = gx[:, None, None] * gy[None, :, None] * gz[None, None, :]
    order = nx[:, None, None] + ny[None, :, None] + nz[None, None, :]
    keep = dist <= max_distance
    if max_order is not None:
        keep &= order <= max_order
    return dist[keep], gain[keep], order[keep]


def generate_rir(room: RoomModel, source: Position, receiver: Position,
                 num_taps: int, max_order: int | None = None) -> ImpulseResponse:
    """Room impulse response from ``source`` to ``receiver``.

    Parameters
    ----------
    room : RoomModel
    source, receiver : Position
        Both strictly inside the room and at least 1 cm apart.
    num_taps : int
        Output length in samples.
    max_order : int, optional
        Cap on the total number of wall reflections per image.  By default
        every image that can reach the output window is included.

    Returns
    -------
    ImpulseResponse
    """
    if isinstance(num_taps, bool) or int(num_taps) != num_taps or num_taps < 1:
        raise InvalidArgumentError(f"num_taps must be a positive integer, got {num_taps!r}")
    num_taps = int(num_taps)
    room.validate(source, "source")
    room.validate(receiver, "receiver")
    if source.distance(receiver) <= MIN_SEPARATION:
        raise InvalidGeometryError("source and receiver coincide")

    hw = SINC_HALF_WIDTH
    spm = room.metres_per_sample
    dist, gain, _ = image_sources(room, source, receiver, (num_taps + hw) * spm, max_order)
    live = gain != 0.0
    dist, gain = dist[live], gain[live]
    delay = dist / spm
    amp = gain / (4.0 * np.pi * dist)

    out = _deposit(delay, amp, num_taps, hw)
    return ImpulseResponse(out, room.sample_rate)


def energy_decay_curve(ir: ImpulseResponse) -> np.ndarray:
    """Schroeder backward-integrated energy decay in dB, normalised to 0 dB at n=0.

    Taps after the last nonzero tap give ``-inf``.
    """
    energy = np.asarray(ir.taps, dtype=float) ** 2
    total = energy.sum()
    if total == 0.0:
        raise DegenerateInputError("energy decay curve of an all-zero response")
    tail = np.cumsum(energy[::-1])[::-1]
    # cumsum round-off can break monotonicity in the last ulp
    tail = np.minimum.accumulate(tail)
    with np.errstate(divide="ignore"):
        edc = 10.0 * np.log10(tail / tail[0])
    edc[0] = 0.0
    return edc


def estimate_t60(edc, sample_rate: float, upper_db: float = -5.0, lower_db: float = -25.0) -> float:
    """Reverberation time from a least-squares line through the -5..-25 dB span.

    The slope is extrapolated to a 60 dB decay.
    """
    edc = np.asarray(edc, dtype=float)
    finite = np.isfinite(edc)
    if not finite.any() or edc[finite].min() > lower_db:
        raise InsufficientDecayError(f"decay curve does not reach {lower_db} dB")
    idx = np.flatnonzero(finite & (edc <= upper_db) & (edc >= lower_db))
    if idx.size < 2:
        raise InsufficientDecayError("fewer than two samples inside the fit range")
    t = idx / float(sample_rate)
    slope, _ = np.polyfit(t, edc[idx], 1)
    if not slope < 0:
        raise InsufficientDecayError("decay curve has no negative slope")
    return -60.0 / slope
