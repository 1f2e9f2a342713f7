"""Analysis/synthesis window generation.

Two window families are supported: the power-complementary sine-of-sine
window used by the overlap-add processors (h^2(n) + h^2(n + L/2) = 1, so a
doubly-windowed 50%-overlap chain reconstructs exactly and overlapped
*independent* noise adds in power), and the Hann window used only for Welch
spectrum estimation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["WindowSpec", "vorbis_window", "hann_window"]

_KINDS = ("vorbis", "hann")


def vorbis_window(length: int) -> np.ndarray:
    """Power-complementary window h(n) = sin((pi/2) * sin^2(pi*n/L)).

    ``length`` must be even and at least 16.
    """
    _check_length(length)
    n = np.arange(length)
    return np.sin(0.5 * np.pi * np.sin(np.pi * n / length) ** 2)


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window (for spectrum estimation, not overlap-add)."""
    _check_length(length)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(length) / length))


def _check_length(length: int) -> None:
    if length % 2 != 0 or length < 16:
        raise ValueError(f"window length must be even and >= 16, got {length}")


@lru_cache(maxsize=32)
def _gains(length: int, kind: str) -> np.ndarray:
    if kind == "vorbis":
        w = vorbis_window(length)
    else:
        w = hann_window(length)
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class WindowSpec:
    """Window length and family.

    Attributes:
        length: window size in samples (even, >= 16).
        kind: "vorbis" (overlap-add processing) or "hann" (Welch only).
    """

    length: int = 1024
    kind: str = "vorbis"

    def __post_init__(self):
        _check_length(self.length)
        if self.kind not in _KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}; expected one of {_KINDS}")

    def gains(self) -> np.ndarray:
        """The L window gains (read-only, cached)."""
        return _gains(self.length, self.kind)

    @property
    def mean_square(self) -> float:
        """Mean of w^2; exactly 0.5 for the power-complementary window."""
        w = self.gains()
        return float(np.mean(w * w))
