"""Feedforward FxLMS active noise control through FIR acoustic channels.

Sign convention: the residual at the error microphone is ``e = d + s * y``,
i.e. the loudspeaker output adds to the disturbance and the controller learns
an inverting filter.  Gradient descent on ``e**2`` therefore updates

    w <- w - mu * e(n) * [xf(n), xf(n-1), ..., xf(n-L+1)]

where ``xf = s_hat * x`` is the filtered reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidArgumentError
from .rir import ImpulseResponse

# Magnitudes at or above this count as divergence: their squares (and hence
# any variance or power estimate) would overflow float64.  NaN fails the test too.
OVERFLOW_LIMIT = 1e150


@dataclass(frozen=True)
class FxLmsConfig:
    filter_length: int = 350
    step_size: float = 1e-5
    initial_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.filter_length) != self.filter_length or self.filter_length < 1:
            raise InvalidArgumentError("filter_length must be a positive integer")
        if not self.step_size >= 0:
            # mu = 0 is allowed as a frozen-controller control case
            raise InvalidArgumentError("step_size must be nonnegative")
        if self.initial_weights is not None:
            w = tuple(float(v) for v in self.initial_weights)
            if len(w) != self.filter_length:
                raise InvalidArgumentError(
                    f"initial_weights has {len(w)} entries, expected {self.filter_length}"
                )
            object.__setattr__(self, "initial_weights", w)

    def weights0(self) -> np.ndarray:
        if self.initial_weights is None:
            return np.zeros(self.filter_length)
        return np.array(self.initial_weights, dtype=float)


@dataclass(eq=False)
class AncRunResult:
    desired: np.ndarray
    error: np.ndarray
    final_weights: np.ndarray
    diverged: bool = False

    @property
    def antinoise(self) -> np.ndarray:
        """Loudspeaker contribution at the microphone (``e - d``)."""
        return self.error - self.desired

    def attenuation_db(self) -> float:
        from .metrics import estimated_attenuation

        return estimated_attenuation(self.desired, self.error)


def _as_taps(channel) -> np.ndarray:
    taps = channel.taps if isinstance(channel, ImpulseResponse) else np.asarray(channel, dtype=float)
    if taps.size == 0:
        raise InvalidArgumentError("channel must have at least one tap")
    return np.ascontiguousarray(taps, dtype=float)


def propagate(x, channel) -> np.ndarray:
    """Causal linear convolution of ``x`` with ``channel``, truncated to ``len(x)``."""
    h = _as_taps(channel)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return x.copy()
    return np.convolve(x, h)[: x.size]


@numba.njit(cache=True)
def _fxlms_loop(x, d, xf, s, w, mu):
    n_samples = x.size
    L = w.size
    M = s.size
    y = np.zeros(n_samples)
    e = np.zeros(n_samples)
    for n in range(n_samples):
        kmax = min(L, n + 1)
        yn = 0.0
        for k in range(kmax):
            yn += w[k] * x[n - k]
        y[n] = yn
        a = 0.0
        for j in range(min(M, n + 1)):
            a += s[j] * y[n - j]
        en = d[n] + a
        if not (abs(yn) < OVERFLOW_LIMIT and abs(en) < OVERFLOW_LIMIT):
            return n, e, w
        e[n] = en
        g = mu * en
        for k in range(kmax):
            w[k] -= g * xf[n - k]
    for k in range(L):
        if not np.isfinite(w[k]):
            return n_samples - 1, e, w
    return n_samples, e, w


def run_fxlms(x, primary, secondary, secondary_estimate, config: FxLmsConfig,
              desired=None) -> AncRunResult:
    """Simulate single-channel feedforward FxLMS.

    Parameters
    ----------
    x : array_like
        Reference (noise source) signal.
    primary, secondary, secondary_estimate : ImpulseResponse or array_like
        Noise-to-microphone path, loudspeaker-to-microphone path, and the
        controller's model of the latter used to filter the reference.
    config : FxLmsConfig
    desired : array_like, optional
        Precomputed ``propagate(x, primary)``; sweeps pass it in to avoid
        recomputing the same disturbance for every loudspeaker position.

    Returns
    -------
    AncRunResult
        When a non-finite (or square-overflowing) value appears, ``diverged`` is set and the traces
        stop just before the offending sample.
    """
    x = np.ascontiguousarray(x, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("reference signal is empty")
    p = _as_taps(primary)
    s = _as_taps(secondary)
    s_hat = _as_taps(secondary_estimate)
    if desired is None:
        d = propagate(x, p)
    else:
        d = np.ascontiguousarray(desired, dtype=float)
        if d.shape != x.shape:
            raise InvalidArgumentError("desired signal must match the reference length")
    xf = propagate(x, s_hat)
    w = config.weights0()
    stop, e, w = _fxlms_loop(x, d, xf, s, w, float(config.step_size))
    diverged = stop < x.size
    return AncRunResult(desired=d[:stop].copy(), error=e[:stop].copy(), final_weights=w, diverged=diverged)
