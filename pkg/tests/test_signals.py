import numpy as np
import pytest
from scipy.signal import find_peaks

from roomanc.errors import InvalidArgumentError, InvalidSpecError
from roomanc.signals import SignalSpec, deterministic_part, power_at, psd, synthesize

FS = 2000.0


def test_first_sample_is_sum_of_cosine_coefficients():
    x = synthesize(SignalSpec(noise_variance=0.0, duration=1.0))
    assert x[0] == 3.5


def test_direct_formula_spot_checks():
    spec = SignalSpec(noise_variance=0.0, duration=1.0)
    x = synthesize(spec)
    for n in (1, 17, 333, 1999):
        want = sum(
            a * np.sin(2 * np.pi * k * 30 * n / FS) + b * np.cos(2 * np.pi * k * 30 * n / FS)
            for k, a, b in zip((1, 2, 3), (-1, -0.5, 0.1), (2, 1, 0.5))
        )
        assert x[n] == pytest.approx(want, abs=1e-12)


def test_zero_coefficients_give_silence():
    spec = SignalSpec(sine_coeffs=(0, 0), cosine_coeffs=(0, 0), noise_variance=0.0, duration=0.5)
    assert not synthesize(spec).any()


def test_length_is_rounded_duration():
    assert synthesize(SignalSpec(duration=0.0126, noise_variance=0)).size == 25


def test_noise_statistics():
    spec = SignalSpec(duration=100.0, seed=7)
    noise = synthesize(spec) - deterministic_part(spec)
    assert noise.size == 200_000
    assert abs(noise.mean()) < 0.005
    assert noise.var() == pytest.approx(0.1, rel=0.05)


def test_same_seed_bit_identical():
    a = synthesize(SignalSpec(duration=5.0, seed=11))
    b = synthesize(SignalSpec(duration=5.0, seed=11))
    assert a.tobytes() == b.tobytes()


def test_different_seeds_share_the_deterministic_part():
    a = synthesize(SignalSpec(duration=100.0, seed=1))
    b = synthesize(SignalSpec(duration=100.0, seed=2))
    assert not np.array_equal(a, b)
    f, p = psd(a - b, FS)
    floor = np.median(p[(f > 10) & (f < 900)])
    for line in (30, 60, 90):
        assert power_at(f, p, line) < floor + 6


def test_noise_free_signal_is_periodic():
    # 2000/30 is not an integer; the sample sequence repeats every 200 samples (3 cycles)
    x = synthesize(SignalSpec(noise_variance=0.0, duration=2.0))
    np.testing.assert_allclose(x[200:], x[:-200], rtol=0, atol=1e-12)


@pytest.mark.parametrize("kwargs", [
    dict(sine_coeffs=(1, 2), cosine_coeffs=(1,)),
    dict(sine_coeffs=(), cosine_coeffs=()),
    dict(fundamental=400.0),
    dict(noise_variance=-0.1),
    dict(seed=-1),
])
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpecError):
        SignalSpec(**kwargs)


def test_psd_pure_tone_peak():
    n = np.arange(200_000)
    f, p = psd(np.sin(2 * np.pi * 30 * n / FS), FS)
    assert f[1] - f[0] <= 1.0
    assert abs(f[np.argmax(p)] - 30.0) <= 1.0


def test_psd_of_source_signal_has_three_lines():
    spec = SignalSpec(duration=100.0, seed=3)
    f, p = psd(synthesize(spec), FS)
    floor = np.median(p[(f > 150) & (f < 900)])
    for line in (30, 60, 90):
        band = np.abs(f - line) <= 1.0
        peak_idx = np.flatnonzero(band)[np.argmax(p[band])]
        assert p[peak_idx] >= p[peak_idx - 1] and p[peak_idx] >= p[peak_idx + 1]
        assert p[peak_idx] > floor + 20
    # the three tallest local maxima sit on the harmonics
    peaks, _ = find_peaks(p)
    top = np.sort(f[peaks[np.argsort(p[peaks])[-3:]]])
    np.testing.assert_allclose(top, [30, 60, 90], atol=1.0)


def test_psd_of_white_noise_is_flat():
    rng = np.random.default_rng(5)
    x = rng.normal(0, np.sqrt(0.1), 200_000)
    f, p = psd(x, FS)
    band = (f >= 10) & (f <= 900)
    level = 10 * np.log10(2 * 0.1 / FS)
    assert np.all(np.abs(p[band] - level) <= 3.0)


def test_psd_rejects_short_input():
    with pytest.raises(InvalidArgumentError):
        psd(np.ones(1000), FS)
