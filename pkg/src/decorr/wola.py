"""Weighted overlap-add (WOLA) framing at 50% overlap.

Frames of length L advance by L/2 and are indexed from -1 so every sample,
including the head of the signal, is covered by exactly two frames.  The same
window is applied at analysis and synthesis; with a power-complementary
window the per-sample weight sum is exactly 1 and an identity transform
reconstructs the input to machine precision.

Frames with even index form one *parity stream* and frames with odd index the
other.  Within a parity stream the frames tile the timeline contiguously
(hop between same-parity frames is L), which lets a recursive filter run
continuously across a stream's frames by carrying its delay line over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .windows import WindowSpec

__all__ = ["WolaLayout", "wola_process", "frame_range"]


@dataclass(frozen=True)
class WolaLayout:
    """Framing geometry: window plus the implied 50% hop."""

    window: WindowSpec = WindowSpec(1024, "vorbis")

    def __post_init__(self):
        if self.window.kind != "vorbis":
            raise ValueError("overlap-add processing requires the power-complementary window")

    @property
    def hop(self) -> int:
        return self.window.length // 2


def frame_range(n_samples: int, hop: int) -> range:
    """Frame indices (first = -1) whose span intersects [0, n_samples)."""
    if n_samples <= 0:
        return range(0)
    last = int(np.ceil(n_samples / hop))  # exclusive
    return range(-1, last)


def wola_process(
    signal: np.ndarray,
    layout: WolaLayout,
    transform: Callable[[np.ndarray, int], np.ndarray],
) -> np.ndarray:
    """Run a per-frame transform under double-windowed overlap-add.

    Args:
        signal: 1-D input samples.
        layout: framing geometry.
        transform: called as ``transform(segment, frame_index)`` with the
            analysis-windowed L-sample segment; must return L samples.
            Frame indices start at -1; edge frames are zero-padded.

    Returns:
        Output of the same length as ``signal``.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("wola_process expects a 1-D signal")
    L = layout.window.length
    if len(x) < L:
        raise ValueError(f"signal shorter than one window ({len(x)} < {L})")
    hop = layout.hop
    w = layout.window.gains()

    n = len(x)
    out = np.zeros(n + 2 * L)
    offset = L  # room for the k = -1 frame and the zero-padded tail
    for k in frame_range(n, hop):
        start = k * hop
        seg = np.zeros(L)
        lo = max(start, 0)
        hi = min(start + L, n)
        seg[lo - start:hi - start] = x[lo:hi]
        seg *= w
        y = np.asarray(transform(seg, k), dtype=np.float64)
        if y.shape != (L,):
            raise ValueError(f"transform returned shape {y.shape}, expected ({L},)")
        out[offset + start:offset + start + L] += w * y
    return out[offset:offset + n]
