"""Reference decorrelators the shaped-allpass pipeline is compared against.

Both operate per channel on a stereo buffer: a memoryless smoothed-absolute-
value non-linearity (applied with opposite sign per channel, since the same
memoryless map on identical channels would leave coherence at 1), and a
first-order allpass whose coefficient is re-drawn every sample.
"""

from __future__ import annotations

import numpy as np

from .audio import AudioBuffer
from .rng import Rng

__all__ = ["smoothed_abs", "first_order_allpass"]


def smoothed_abs(
    stereo: AudioBuffer,
    alpha: float,
    c_factor: float = 0.65,
    streaming_sigma: bool = False,
) -> AudioBuffer:
    """x~(n) = x(n) + alpha * sqrt(x(n)^2 + c^2), c = c_factor * sigma_x.

    The left channel uses +alpha, the right -alpha.  sigma_x is each
    channel's RMS over the whole buffer; with ``streaming_sigma`` it is a
    causal 1-second sliding RMS instead (for streaming use).  A silent
    channel has c = 0 and maps to itself.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    out = np.empty_like(stereo.data)
    for ch in range(stereo.n_channels):
        x = stereo.channel(ch)
        if streaming_sigma:
            win = min(stereo.sample_rate, len(x))
            csum = np.concatenate([[0.0], np.cumsum(x * x)])
            lo = np.maximum(np.arange(1, len(x) + 1) - win, 0)
            counts = np.arange(1, len(x) + 1) - lo
            sigma = np.sqrt((csum[1:] - csum[lo]) / counts)
        else:
            sigma = np.sqrt(np.mean(x * x))
        c = c_factor * sigma
        sign = 1.0 if ch == 0 else -1.0
        out[ch] = x + sign * alpha * np.sqrt(x * x + c * c)
    return AudioBuffer(out, stereo.sample_rate)


def first_order_allpass(
    stereo: AudioBuffer,
    alpha_min: float = -0.985,
    seed: int = 0,
    walk_step: float = 0.01,
) -> AudioBuffer:
    """Sample-varying first-order allpass y(n) = a(n)x(n) + x(n-1) - a(n)y(n-1).

    The coefficient takes a bounded random walk in [alpha_min, 0] with
    uniform steps of +/-``walk_step``, starting at alpha_min / 2; varying it
    per sample is what makes the processing non-linear (and produces the
    characteristic broadband noise artifact).  Channels use independent
    sub-streams of ``seed``.
    """
    if not -1.0 < alpha_min < 0.0:
        raise ValueError(f"alpha_min must be in (-1, 0), got {alpha_min}")
    root = Rng(seed)
    out = np.empty_like(stereo.data)
    for ch in range(stereo.n_channels):
        rng = root.split(f"allpass/ch{ch}")
        x = stereo.channel(ch)
        n = len(x)
        steps = rng.uniform_array(n, -walk_step, walk_step)
        out[ch] = _allpass_walk(x, steps, alpha_min)
    return AudioBuffer(out, stereo.sample_rate)


def _allpass_walk(x: np.ndarray, steps: np.ndarray, alpha_min: float) -> np.ndarray:
    y = np.empty_like(x)
    a = alpha_min / 2.0
    prev_x = 0.0
    prev_y = 0.0
    for i in range(len(x)):
        a += steps[i]
        if a < alpha_min:
            a = alpha_min
        elif a > 0.0:
            a = 0.0
        v = a * x[i] + prev_x - a * prev_y
        y[i] = v
        prev_x = x[i]
        prev_y = v
    return y
