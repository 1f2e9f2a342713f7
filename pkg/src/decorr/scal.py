"""Shaped comb-allpass (SCAL) channel decorrelation.

The filter is an order-N comb allpass with an extra first-order shaping tap:

    A(z) = (alpha * (1 - beta * z^-1) + z^-N)
           / (1 - alpha * beta * z^-(N-1) + alpha * z^-N)

The numerator is the reversed denominator, so |A| = 1 at every frequency;
``alpha`` sets the depth of the phase ripple and ``beta`` tilts it toward
high frequencies (poles approach the unit circle near Nyquist and retreat
from it near DC).  A sufficient stability condition is
|alpha| * (1 + |beta|) < 1.

Decorrelation needs the processing to be non-linear, so ``alpha`` takes a
bounded random walk and ``N`` is re-drawn for every analysis window; each
50%-overlap parity stream runs its own continuously-evolving filter whose
delay lines persist across windows (and across changes of N), which keeps
the output click-free with zero added latency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer
from .rng import Rng
from .windows import WindowSpec
from .wola import WolaLayout, wola_process

__all__ = [
    "ScalParams",
    "ScalConfig",
    "ScalStream",
    "ScalState",
    "UnstableFilterError",
    "FilterOverflowError",
    "scal_frequency_response",
    "scal_filter",
    "scal_impulse_response",
    "update_params",
    "scal_process",
]


class UnstableFilterError(ValueError):
    """Filter coefficients violate the sufficient stability bound."""


class FilterOverflowError(ArithmeticError):
    """Filtering produced a non-finite sample."""


@dataclass(frozen=True)
class ScalParams:
    """One window's filter coefficients.

    Attributes:
        alpha: modulation depth.
        beta: spectral tilt, in [0, 1).
        order: comb order N in samples, >= 2 (at N = 1 the shaping tap and
            the comb tap would collide).
    """

    alpha: float
    beta: float
    order: int

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ValueError(f"order must be an integer >= 2, got {self.order}")

    @property
    def is_stable(self) -> bool:
        return abs(self.alpha) * (1.0 + abs(self.beta)) < 1.0

    def require_stable(self) -> None:
        if not self.is_stable:
            raise UnstableFilterError(
                f"|alpha|*(1+|beta|) = {abs(self.alpha) * (1 + abs(self.beta)):.4f} >= 1 "
                f"(alpha={self.alpha}, beta={self.beta})"
            )


@dataclass(frozen=True)
class ScalConfig:
    """Randomization policy for the per-window filter parameters.

    ``alpha`` walks with uniform steps in [-r_max, r_max], clamped to
    +/-(1 - epsilon)/(1 + |beta|) so the stability bound holds by
    construction (``epsilon`` keeps the high-frequency poles off the unit
    circle).  ``n_range`` is the inclusive interval N is re-drawn from for
    every window.
    """

    beta: float = 0.36
    r_max: float = 0.6
    epsilon: float = 0.02
    n_range: tuple[int, int] = (32, 128)
    window: WindowSpec = field(default_factory=WindowSpec)

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not 0.0 < self.r_max <= 1.0:
            raise ValueError(f"r_max must be in (0, 1], got {self.r_max}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        lo, hi = self.n_range
        if lo < 2 or hi < lo or hi > self.window.length // 4:
            raise ValueError(
                f"n_range must lie within [2, {self.window.length // 4}], got {self.n_range}"
            )

    @property
    def alpha_bound(self) -> float:
        return (1.0 - self.epsilon) / (1.0 + abs(self.beta))


def _coefficients(params: ScalParams) -> tuple[np.ndarray, np.ndarray]:
    """Dense (b, a) vectors; += so the N = 2 tap overlaps combine correctly."""
    alpha, beta, N = params.alpha, params.beta, params.order
    b = np.zeros(N + 1)
    a = np.zeros(N + 1)
    b[0] = alpha
    b[1] += -alpha * beta
    b[N] += 1.0
    a[0] = 1.0
    a[N - 1] += -alpha * beta
    a[N] += alpha
    return b, a


def scal_frequency_response(
    params: ScalParams, n_points: int, sample_rate: float
) -> tuple[np.ndarray, np.ndarray]:
    """Complex response on a uniform grid of ``n_points`` over [0, fs/2).

    Grid point i sits at i * (fs/2) / n_points.  The magnitude is 1 at every
    frequency for any stable parameter set.
    """
    params.require_stable()
    if n_points < 1:
        raise ValueError("n_points must be positive")
    alpha, beta, N = params.alpha, params.beta, params.order
    freqs = np.arange(n_points) * (sample_rate / 2.0) / n_points
    omega = np.pi * np.arange(n_points) / n_points
    z1 = np.exp(-1j * omega)
    zn = np.exp(-1j * omega * N)
    num = alpha * (1.0 - beta * z1) + zn
    den = 1.0 - alpha * beta * zn * np.conj(z1) + alpha * zn
    return freqs, num / den


class ScalStream:
    """One parity stream's recursive filter with persistent delay lines.

    The raw input/output histories (length = the largest order the stream
    may use) are the carried state; when N changes between windows the old
    samples at the new tap offsets are simply reused, so no reset transient
    occurs.
    """

    def __init__(self, max_order: int):
        if max_order < 2:
            raise ValueError("max_order must be >= 2")
        self.max_order = max_order
        self._x_hist = np.zeros(max_order)
        self._y_hist = np.zeros(max_order)

    def filter_window(self, params: ScalParams, segment: np.ndarray) -> np.ndarray:
        """Run y(n) = a*x(n) - a*b*x(n-1) + x(n-N) + a*b*y(n-N+1) - a*y(n-N).

        The recursion continues from the stream's histories.  Raises
        UnstableFilterError for unstable coefficients and FilterOverflowError
        if any produced sample is non-finite.
        """
        params.require_stable()
        N = params.order
        if N > self.max_order:
            raise ValueError(f"order {N} exceeds stream max_order {self.max_order}")
        seg = np.asarray(segment, dtype=np.float64)
        alpha = params.alpha
        ab = alpha * params.beta
        m = self.max_order
        n = len(seg)

        xbuf = np.concatenate([self._x_hist, seg])
        # feedforward taps, fully vectorized
        ff = alpha * xbuf[m:] - ab * xbuf[m - 1:m + n - 1] + xbuf[m - N:m + n - N]
        ybuf = np.empty(m + n)
        ybuf[:m] = self._y_hist
        # feedback taps in blocks of N-1 samples: inside a block every needed
        # y lies before the block start, so each block is one vector op
        s = m
        end = m + n
        while s < end:
            e = min(s + N - 1, end)
            ybuf[s:e] = (
                ff[s - m:e - m]
                + ab * ybuf[s - N + 1:e - N + 1]
                - alpha * ybuf[s - N:e - N]
            )
            s = e
        y = ybuf[m:]
        if not np.all(np.isfinite(y)):
            raise FilterOverflowError("non-finite sample in filter output")
        if n >= m:
            self._x_hist = xbuf[-m:].copy()
            self._y_hist = ybuf[-m:].copy()
        else:
            self._x_hist = np.concatenate([self._x_hist, seg])[-m:]
            self._y_hist = np.concatenate([self._y_hist, y])[-m:]
        return y


def scal_filter(params: ScalParams, signal: np.ndarray) -> np.ndarray:
    """Filter a whole signal with constant parameters (zero initial state)."""
    stream = ScalStream(params.order)
    return stream.filter_window(params, np.asarray(signal, dtype=np.float64))


def scal_impulse_response(params: ScalParams, n: int = 1 << 16) -> np.ndarray:
    """First ``n`` samples of the impulse response."""
    impulse = np.zeros(n)
    impulse[0] = 1.0
    return scal_filter(params, impulse)


def update_params(prev: ScalParams | None, config: ScalConfig, rng: Rng) -> ScalParams:
    """Next window's parameters: re-draw N, step alpha, clamp to stability.

    N is drawn first, uniformly over ``n_range``; alpha then takes one
    uniform step in [-r_max, r_max] from its previous value (0 at startup)
    and is clamped symmetrically to +/-(1 - epsilon)/(1 + |beta|).
    """
    order = rng.integers(*config.n_range)
    step = rng.uniform(-config.r_max, config.r_max)
    prev_alpha = prev.alpha if prev is not None else 0.0
    bound = config.alpha_bound
    alpha = min(max(prev_alpha + step, -bound), bound)
    return ScalParams(alpha=alpha, beta=config.beta, order=order)


class ScalState:
    """Per-channel processing state: two parity streams plus their RNG."""

    def __init__(self, config: ScalConfig, rng: Rng):
        self.config = config
        self.rng = rng
        n_max = config.n_range[1]
        self.streams = (ScalStream(n_max), ScalStream(n_max))
        self.params: list[ScalParams | None] = [None, None]

    def process_frame(self, segment: np.ndarray, frame_index: int) -> np.ndarray:
        parity = frame_index & 1
        self.params[parity] = update_params(self.params[parity], self.config, self.rng)
        return self.streams[parity].filter_window(self.params[parity], segment)


def scal_process(stereo: AudioBuffer, config: ScalConfig | None = None, seed: int = 0) -> AudioBuffer:
    """Decorrelate a stereo buffer with per-channel randomized comb allpasses.

    Channels run independent parameter streams split from ``seed``; the
    output has the input's length and no added latency.
    """
    config = config or ScalConfig()
    if stereo.sample_rate < 8000:
        raise ValueError(f"sample rate too low: {stereo.sample_rate} < 8000")
    layout = WolaLayout(config.window)
    root = Rng(seed)
    outs = []
    for ch in range(stereo.n_channels):
        state = ScalState(config, root.split(f"scal/ch{ch}"))
        outs.append(wola_process(stereo.channel(ch), layout, state.process_frame))
    return AudioBuffer(np.vstack(outs), stereo.sample_rate)
