"""Slow, independent reference implementations used only by the tests.

None of these import roomanc; they are written from the textbook
definitions so that agreement with the package is meaningful.
"""

import math

HALF_WIDTH = 16


def mirror_images_1d(src, length, max_reflections):
    """1-D images built by explicit mirroring.

    Yields ``(coordinate, hits_low_wall, hits_high_wall)``.  A reflection in
    the wall at 0 maps p -> -p, in the wall at ``length`` maps p -> 2L - p;
    sequences alternate walls, starting with either one.
    """
    yield src, 0, 0
    for first in (0, 1):
        p, lo, hi = src, 0, 0
        wall = first
        for _ in range(max_reflections):
            if wall == 0:
                p, lo = -p, lo + 1
            else:
                p, hi = 2 * length - p, hi + 1
            yield p, lo, hi
            wall = 1 - wall


def windowed_sinc(t, half_width=HALF_WIDTH):
    if abs(t) >= half_width:
        return 0.0
    sinc = 1.0 if t == 0 else math.sin(math.pi * t) / (math.pi * t)
    return 0.5 * (1.0 + math.cos(math.pi * t / half_width)) * sinc


def brute_force_rir(dims, betas, src, rcv, c, fs, num_taps, max_order=None):
    """Image-method RIR by looping over reflection sequences per axis."""
    reach = (num_taps + HALF_WIDTH) * c / fs
    per_axis = []
    for k in range(3):
        # enough reflections per axis for any image inside ``reach``
        kmax = int(reach / dims[k]) + 2
        if max_order is not None:
            kmax = min(kmax, max_order)
        per_axis.append(list(mirror_images_1d(src[k], dims[k], kmax)))
    out = [0.0] * num_taps
    for px, xlo, xhi in per_axis[0]:
        for py, ylo, yhi in per_axis[1]:
            for pz, zlo, zhi in per_axis[2]:
                order = xlo + xhi + ylo + yhi + zlo + zhi
                if max_order is not None and order > max_order:
                    continue
                dist = math.sqrt((px - rcv[0]) ** 2 + (py - rcv[1]) ** 2 + (pz - rcv[2]) ** 2)
                if dist > reach:
                    continue
                gain = (betas[0] ** xlo * betas[1] ** xhi * betas[2] ** ylo
                        * betas[3] ** yhi * betas[4] ** zlo * betas[5] ** zhi)
                if gain == 0.0:
                    continue
                amp = gain / (4.0 * math.pi * dist)
                tau = dist * fs / c
                for n in range(max(0, math.floor(tau) - HALF_WIDTH), min(num_taps, math.floor(tau) + HALF_WIDTH + 1)):
                    out[n] += amp * windowed_sinc(n - tau)
    return out


def direct_convolution(x, h):
    """Same-length causal convolution, double loop."""
    y = [0.0] * len(x)
    for n in range(len(x)):
        acc = 0.0
        for k in range(len(h)):
            if n - k >= 0:
                acc += h[k] * x[n - k]
        y[n] = acc
    return y


def minimal_lms(x, d, length, mu):
    """Textbook LMS with the e = d + y convention (identity paths).

    Returns (e, w).
    """
    w = [0.0] * length
    e = []
    for n in range(len(x)):
        taps = [x[n - k] if n - k >= 0 else 0.0 for k in range(length)]
        y = sum(wk * xk for wk, xk in zip(w, taps))
        en = d[n] + y
        e.append(en)
        w = [wk - mu * en * xk for wk, xk in zip(w, taps)]
    return e, w
