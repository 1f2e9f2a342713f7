"""Inter-channel coherence and frequency weighting.

The squared coherence gamma^2(f) = |Sxy|^2 / (Sxx * Syy) is estimated from
Welch-averaged spectra.  Per-bin coherence converts to an equivalent
signal-to-noise ratio SNR = (1/gamma^2 - 1)^-1, and a single comparable
scalar is produced by weighting bins with the derivative of the
critical-band (Bark) frequency map so each critical band contributes
equally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.signal
from scipy.optimize import brentq

from .audio import AudioBuffer
from .windows import WindowSpec

__all__ = [
    "WelchConfig",
    "CoherenceReport",
    "coherence",
    "equivalent_snr",
    "bark",
    "bark_derivative",
    "bark_weighted_coherence",
    "bark_band_edges",
    "band_means",
]

SNR_CLIP_DB = 60.0
_DENOM_FLOOR = 1e-20


@dataclass(frozen=True)
class WelchConfig:
    """Welch cross-spectrum estimator settings."""

    segment_length: int = 1024
    overlap: float = 0.5
    window: WindowSpec = field(default_factory=lambda: WindowSpec(1024, "hann"))

    def __post_init__(self):
        L = self.segment_length
        if L < 16 or L & (L - 1):
            raise ValueError(f"segment length must be a power of two >= 16, got {L}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError(f"overlap must be in [0, 1), got {self.overlap}")
        if self.window.length != L:
            raise ValueError("window length must equal segment length")

    @property
    def step(self) -> int:
        return max(1, int(round(self.segment_length * (1.0 - self.overlap))))


@dataclass
class CoherenceReport:
    """Per-frequency coherence plus the critical-band-weighted scalar.

    ``snr_db`` is clipped to [-60, +60] dB (gamma^2 = 1 would be infinite).
    ``degenerate`` flags an all-zero input, for which every field is zero.
    """

    freqs_hz: np.ndarray
    gamma_sq: np.ndarray
    snr_db: np.ndarray
    bark_weighted: float
    n_segments: int
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "bark_weighted": self.bark_weighted,
            "n_segments": self.n_segments,
            "degenerate": self.degenerate,
            "freqs_hz": self.freqs_hz.tolist(),
            "gamma_sq": self.gamma_sq.tolist(),
            "snr_db": self.snr_db.tolist(),
        }


def coherence(x: AudioBuffer, y: AudioBuffer, cfg: WelchConfig | None = None) -> CoherenceReport:
    """Squared coherence of two mono buffers.

    Requires equal lengths and sample rates and at least four Welch
    segments' worth of samples.
    """
    cfg = cfg or WelchConfig()
    for name, buf in (("x", x), ("y", y)):
        if buf.n_channels != 1:
            raise ValueError(f"{name} must be mono, has {buf.n_channels} channels")
    if x.sample_rate != y.sample_rate:
        raise ValueError(f"sample rates differ: {x.sample_rate} vs {y.sample_rate}")
    if x.n_samples != y.n_samples:
        raise ValueError(f"lengths differ: {x.n_samples} vs {y.n_samples}")
    n_min = cfg.segment_length + 3 * cfg.step
    if x.n_samples < n_min:
        raise ValueError(f"need >= {n_min} samples (4 segments), got {x.n_samples}")

    xs = x.channel(0)
    ys = y.channel(0)
    n_segments = 1 + (x.n_samples - cfg.segment_length) // cfg.step
    if not xs.any() or not ys.any():
        freqs = np.fft.rfftfreq(cfg.segment_length, 1.0 / x.sample_rate)
        zeros = np.zeros_like(freqs)
        return CoherenceReport(freqs, zeros, np.full_like(freqs, -SNR_CLIP_DB),
                               0.0, n_segments, degenerate=True)

    kwargs = dict(
        fs=x.sample_rate,
        window=cfg.window.gains(),
        nperseg=cfg.segment_length,
        noverlap=cfg.segment_length - cfg.step,
        detrend=False,
    )
    freqs, sxx = scipy.signal.welch(xs, **kwargs)
    _, syy = scipy.signal.welch(ys, **kwargs)
    _, sxy = scipy.signal.csd(xs, ys, **kwargs)

    denom = sxx * syy
    floor = _DENOM_FLOOR * float(np.mean(sxx)) * float(np.mean(syy))
    valid = denom > floor
    gamma_sq = np.zeros_like(denom)
    np.divide(np.abs(sxy) ** 2, denom, out=gamma_sq, where=valid)
    gamma_sq = np.clip(gamma_sq, 0.0, 1.0)

    return CoherenceReport(
        freqs_hz=freqs,
        gamma_sq=gamma_sq,
        snr_db=equivalent_snr(gamma_sq),
        bark_weighted=bark_weighted_coherence(gamma_sq, freqs),
        n_segments=n_segments,
    )


def equivalent_snr(gamma_sq: np.ndarray) -> np.ndarray:
    """Per-bin SNR in dB implied by squared coherence, clipped to +/-60 dB."""
    g = np.clip(np.asarray(gamma_sq, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = g / (1.0 - g)
        db = 10.0 * np.log10(snr)
    db = np.where(g >= 1.0, SNR_CLIP_DB, db)
    db = np.where(g <= 0.0, -SNR_CLIP_DB, db)
    return np.clip(db, -SNR_CLIP_DB, SNR_CLIP_DB)


def bark(f):
    """Critical-band rate (Bark) for frequency in Hz."""
    f = np.asarray(f, dtype=np.float64)
    return 13.0 * np.arctan(f / 1316.0) + 3.5 * np.arctan((f / 7500.0) ** 2)


def bark_derivative(f):
    """Analytic d(Bark)/df; strictly positive for f > 0."""
    f = np.asarray(f, dtype=np.float64)
    term1 = (13.0 / 1316.0) / (1.0 + (f / 1316.0) ** 2)
    term2 = 3.5 * (2.0 * f / 7500.0 ** 2) / (1.0 + (f ** 2 / 7500.0 ** 2) ** 2)
    return term1 + term2


def bark_weighted_coherence(gamma_sq: np.ndarray, freqs_hz: np.ndarray) -> float:
    """Scalar coherence: per-bin gamma^2 weighted by the Bark-map derivative."""
    g = np.asarray(gamma_sq, dtype=np.float64)
    f = np.asarray(freqs_hz, dtype=np.float64)
    if g.shape != f.shape:
        raise ValueError(f"shape mismatch: gamma_sq {g.shape} vs freqs {f.shape}")
    w = bark_derivative(f)
    return float(np.sum(w * g) / np.sum(w))


@lru_cache(maxsize=16)
def bark_band_edges(sample_rate: int, resolution: float = 0.5) -> np.ndarray:
    """Band edges in Hz at fixed Bark spacing, covering [0, fs/2]."""
    top = float(bark(sample_rate / 2.0))
    n_full = int(np.floor(top / resolution))
    edges = [0.0]
    for k in range(1, n_full + 1):
        target = k * resolution
        edges.append(brentq(lambda f: float(bark(f)) - target, 1e-6, sample_rate / 2.0))
    if edges[-1] < sample_rate / 2.0 - 1e-9:
        edges.append(sample_rate / 2.0)
    arr = np.asarray(edges)
    arr.setflags(write=False)
    return arr


def band_means(values: np.ndarray, freqs_hz: np.ndarray, edges_hz: np.ndarray) -> np.ndarray:
    """Mean of ``values`` over each band; NaN for bands holding no bins.

    Bin k belongs to the band whose half-open interval [lo, hi) contains its
    frequency; the top edge is inclusive.
    """
    idx = np.searchsorted(edges_hz, freqs_hz, side="right") - 1
    idx = np.clip(idx, 0, len(edges_hz) - 2)
    n_bands = len(edges_hz) - 1
    sums = np.bincount(idx, weights=values, minlength=n_bands)
    counts = np.bincount(idx, minlength=n_bands)
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
