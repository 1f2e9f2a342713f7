"""Deterministic, seedable random number generation.

Every random decision in this package flows through :class:`Rng` so that a
single 64-bit seed reproduces a run bit-exactly on any platform.  Two fixed
primitives are used (both are frozen; changing either would invalidate every
golden value in the test suite):

* **SplitMix64** -- the 64-bit mixing function.  It seeds the main generator,
  derives independent sub-streams from string labels, and serves bulk array
  draws in counter mode (output ``i`` is ``mix64(key + i * GOLDEN)``, which
  vectorizes cleanly).
* **xoshiro256**** -- the sequential scalar generator behind
  :meth:`Rng.uniform` and friends.

Sub-streams are derived from the *root seed* and a label, never from the
current stream position, so the draw order of one consumer cannot perturb
another (e.g. the two channels of a stereo processor).
"""

from __future__ import annotations

import numpy as np

__all__ = ["Rng", "derive_seed"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# numpy constants for the vectorized counter-mode path
_NP_GOLDEN = np.uint64(_GOLDEN)
_NP_MIX_A = np.uint64(_MIX_A)
_NP_MIX_B = np.uint64(_MIX_B)
_U64_TO_UNIT = 2.0 ** -53  # top 53 bits -> float in [0, 1)


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    """FNV-1a hash of a label (Python's hash() is salted, so not usable)."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def _counter_block(key: int, n: int) -> np.ndarray:
    """n SplitMix64 outputs for counters 1..n under ``key``, as uint64."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(key & _MASK64) + idx * _NP_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _NP_MIX_A
    z = (z ^ (z >> np.uint64(27))) * _NP_MIX_B
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, label: str) -> int:
    """Child seed for (seed, label); same formula :meth:`Rng.split` uses."""
    return _mix64((seed & _MASK64) ^ _mix64(_fnv1a64(label)))


class Rng:
    """Sequential xoshiro256** stream seeded through SplitMix64.

    The root seed is retained so :meth:`split` is a pure function of
    (seed, label), independent of how many draws were consumed.
    """

    __slots__ = ("_seed", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        seed = int(seed) & _MASK64
        self._seed = seed
        # SplitMix64 sequence seeds the four state words
        sm = seed
        words = []
        for _ in range(4):
            sm = (sm + _GOLDEN) & _MASK64
            words.append(_mix64(sm))
        if not any(words):  # all-zero state is the one forbidden xoshiro state
            words[0] = _GOLDEN
        self._s0, self._s1, self._s2, self._s3 = words

    @property
    def seed(self) -> int:
        """Root seed this stream was constructed from."""
        return self._seed

    def split(self, label: str) -> "Rng":
        """Independent child stream for ``label``, derived from the root seed."""
        return Rng(derive_seed(self._seed, label))

    def next_uint64(self) -> int:
        """Advance the stream and return the next 64-bit value."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """One draw in [lo, hi].  Raises ValueError if lo > hi."""
        if lo > hi:
            raise ValueError(f"uniform range is empty: lo={lo} > hi={hi}")
        u = (self.next_uint64() >> 11) * _U64_TO_UNIT
        return lo + u * (hi - lo)

    def integers(self, lo: int, hi: int) -> int:
        """One integer draw in [lo, hi], both ends inclusive."""
        if lo > hi:
            raise ValueError(f"integer range is empty: lo={lo} > hi={hi}")
        span = hi - lo + 1
        u = (self.next_uint64() >> 11) * _U64_TO_UNIT
        k = int(u * span)
        return lo + min(k, span - 1)

    def uniform_array(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """n draws in [lo, hi) as float64.

        Consumes exactly one value from the sequential stream (the counter
        key), regardless of ``n``, so array sizes do not shift later draws.
        """
        if lo > hi:
            raise ValueError(f"uniform range is empty: lo={lo} > hi={hi}")
        key = self.next_uint64()
        u = (_counter_block(key, n) >> np.uint64(11)).astype(np.float64) * _U64_TO_UNIT
        return lo + u * (hi - lo)

    def normal_array(self, n: int) -> np.ndarray:
        """n standard-normal draws (Box-Muller over one counter block)."""
        m = (n + 1) // 2
        key = self.next_uint64()
        block = _counter_block(key, 2 * m)
        u1 = ((block[:m] >> np.uint64(11)).astype(np.float64) + 1.0) * _U64_TO_UNIT
        u2 = (block[m:] >> np.uint64(11)).astype(np.float64) * _U64_TO_UNIT
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]

    def __repr__(self) -> str:
        return f"Rng(seed=0x{self._seed:016x})"
