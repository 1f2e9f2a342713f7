"""Psychoacoustically shaped noise injection.

Low frequencies are decorrelated by adding noise that the signal itself
masks.  A simplified masking model estimates, per half-Bark band, the noise
power the current frame can hide: band energies spread across neighbouring
bands with two linear-in-Bark slopes (steep below the masker, shallow above,
combined by max), drop by a fixed offset, and roll off above a corner
frequency where the phase-domain decorrelation already dominates.  Noise is
synthesized in the frequency domain with random phases, overlap-added with a
power-complementary window (independent overlapping frames add in *power*,
so the synthesis hits the target spectrum exactly), and delayed by one hop so
the signal path itself stays untouched and delay-free: temporal masking hides
the lag of the noise.

Band thresholds are mean one-sided power spectral densities (units: sample^2
per Hz), the same convention `band_psd` uses for measurement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .audio import AudioBuffer
from .metrics import bark, bark_band_edges
from .rng import Rng
from .windows import WindowSpec
from .wola import frame_range

__all__ = [
    "NoiseConfig",
    "MaskingCurve",
    "masking_curve",
    "synth_masked_noise",
    "inject_noise",
    "band_psd",
]


@dataclass(frozen=True)
class NoiseConfig:
    """Noise gain plus the masking-model constants.

    ``gamma`` is an amplitude gain: injected power scales as gamma^2.
    """

    gamma: float = 1.0
    window: WindowSpec = field(default_factory=WindowSpec)
    hf_rolloff_start_hz: float = 2000.0
    hf_rolloff_db_per_octave: float = 6.0
    masking_offset_db: float = 12.0
    spread_lower_db_per_bark: float = 25.0
    spread_upper_db_per_bark: float = 10.0
    floor_dbfs: float = -80.0
    band_resolution_bark: float = 0.5

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.hf_rolloff_start_hz <= 0:
            raise ValueError("hf_rolloff_start_hz must be positive")


@dataclass
class MaskingCurve:
    """Per-band noise-power ceiling for one frame.

    ``thresholds[b]`` is the mean PSD allowed in band
    [band_edges_hz[b], band_edges_hz[b+1]); the last edge is the Nyquist
    frequency.
    """

    band_edges_hz: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        if len(self.thresholds) != len(self.band_edges_hz) - 1:
            raise ValueError("thresholds/edges length mismatch")
        if np.any(self.thresholds < 0):
            raise ValueError("thresholds must be non-negative")
        if np.any(np.diff(self.band_edges_hz) <= 0):
            raise ValueError("band edges must be strictly increasing")

    @property
    def sample_rate(self) -> float:
        return 2.0 * float(self.band_edges_hz[-1])


class _BandMap:
    """Cached FFT-bin <-> Bark-band geometry for one (fs, L, resolution)."""

    def __init__(self, sample_rate: int, length: int, resolution: float,
                 lower_slope: float, upper_slope: float,
                 rolloff_start: float, rolloff_slope: float):
        self.edges = np.asarray(bark_band_edges(sample_rate, resolution))
        freqs = np.fft.rfftfreq(length, 1.0 / sample_rate)
        idx = np.searchsorted(self.edges, freqs, side="right") - 1
        self.bin_band = np.clip(idx, 0, len(self.edges) - 2)
        self.n_bands = len(self.edges) - 1
        self.bin_counts = np.bincount(self.bin_band, minlength=self.n_bands)
        self.bandwidths = np.diff(self.edges)
        centers_hz = 0.5 * (self.edges[:-1] + self.edges[1:])
        z = bark(centers_hz)
        # attenuation[m, b]: dB lost spreading from masker band m to band b
        dz = z[np.newaxis, :] - z[:, np.newaxis]
        self.spread_atten = np.where(dz < 0.0, -dz * lower_slope, dz * upper_slope)
        self.rolloff_db = np.where(
            centers_hz > rolloff_start,
            rolloff_slope * np.log2(np.maximum(centers_hz, rolloff_start) / rolloff_start),
            0.0,
        )


@lru_cache(maxsize=8)
def _band_map(sample_rate: int, length: int, resolution: float,
              lower_slope: float, upper_slope: float,
              rolloff_start: float, rolloff_slope: float) -> _BandMap:
    return _BandMap(sample_rate, length, resolution,
                    lower_slope, upper_slope, rolloff_start, rolloff_slope)


def _map_for(config: NoiseConfig, sample_rate: int) -> _BandMap:
    return _band_map(
        int(sample_rate), config.window.length, config.band_resolution_bark,
        config.spread_lower_db_per_bark, config.spread_upper_db_per_bark,
        config.hf_rolloff_start_hz, config.hf_rolloff_db_per_octave,
    )


def band_psd(frame_spectrum: np.ndarray, bmap: _BandMap,
             length: int, sample_rate: float, window_ms: float) -> np.ndarray:
    """Mean one-sided PSD per band from an rfft of a windowed frame.

    ``window_ms`` is the analysis window's mean square, which calibrates the
    windowed-frame spectrum back to raw-signal power density.
    """
    p = np.abs(frame_spectrum) ** 2
    p[1:-1] *= 2.0
    psd = p / (length * sample_rate * window_ms)
    sums = np.bincount(bmap.bin_band, weights=psd, minlength=bmap.n_bands)
    return sums / np.maximum(bmap.bin_counts, 1)


def masking_curve(frame: np.ndarray, config: NoiseConfig, sample_rate: int) -> MaskingCurve:
    """Noise-power ceiling for one analysis-windowed frame.

    Pipeline: band PSDs -> two-slope spreading (max composition) -> fixed
    offset below the mask -> high-frequency rolloff.  Bands whose signal
    level is under ``floor_dbfs`` produce zero (no audible masker, no noise),
    so a silent frame yields an all-zero curve.
    """
    frame = np.asarray(frame, dtype=np.float64)
    L = config.window.length
    if len(frame) != L:
        raise ValueError(f"frame length {len(frame)} != window length {L}")
    bmap = _map_for(config, sample_rate)

    energy = band_psd(np.fft.rfft(frame), bmap, L, sample_rate, config.window.mean_square)
    audible = energy * bmap.bandwidths > 10.0 ** (config.floor_dbfs / 10.0)
    if not np.any(audible):
        return MaskingCurve(bmap.edges.copy(), np.zeros(bmap.n_bands))

    with np.errstate(divide="ignore"):
        level_db = 10.0 * np.log10(np.where(audible, energy, 1.0))
    level_db = np.where(audible, level_db, -np.inf)
    spread_db = np.max(level_db[:, np.newaxis] - bmap.spread_atten, axis=0)
    thr_db = spread_db - config.masking_offset_db - bmap.rolloff_db
    thresholds = np.where(np.isfinite(thr_db), 10.0 ** (thr_db / 10.0), 0.0)
    return MaskingCurve(bmap.edges.copy(), thresholds)


def synth_masked_noise(curve: MaskingCurve, gamma: float, rng: Rng, length: int) -> np.ndarray:
    """Random-phase noise frame whose band PSDs hit gamma^2 * threshold.

    The frame is synthesized in the frequency domain: each bin gets the
    magnitude implied by its band's threshold and an independent uniform
    phase (DC and Nyquist stay zero).
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    fs = curve.sample_rate
    freqs = np.fft.rfftfreq(length, 1.0 / fs)
    idx = np.clip(np.searchsorted(curve.band_edges_hz, freqs, side="right") - 1,
                  0, len(curve.thresholds) - 1)
    target_psd = gamma * gamma * curve.thresholds[idx]
    mags = np.sqrt(target_psd * fs * length / 2.0)
    phases = rng.uniform_array(len(freqs), 0.0, 2.0 * np.pi)
    spectrum = mags * np.exp(1j * phases)
    spectrum[0] = 0.0
    spectrum[-1] = 0.0
    return np.fft.irfft(spectrum, length)


def inject_noise(stereo: AudioBuffer, config: NoiseConfig | None = None, seed: int = 0) -> AudioBuffer:
    """Add masked noise per channel; the signal path is untouched.

    Per analysis frame the masking curve is computed, a noise frame is
    synthesized and windowed, and the result is accumulated one hop *later*
    than the frame it was derived from.  With gamma = 0 the output is
    bit-identical to the input.  Channels draw from independent sub-streams
    of ``seed``.
    """
    config = config or NoiseConfig()
    out = stereo.copy()
    if config.gamma == 0.0:
        return out
    L = config.window.length
    hop = L // 2
    w = config.window.gains()
    n = stereo.n_samples
    if n < L:
        raise ValueError(f"signal shorter than one window ({n} < {L})")
    root = Rng(seed)
    for ch in range(stereo.n_channels):
        rng = root.split(f"noise/ch{ch}")
        x = stereo.channel(ch)
        dest = out.data[ch]
        for k in frame_range(n, hop):
            start = k * hop
            seg = np.zeros(L)
            lo, hi = max(start, 0), min(start + L, n)
            seg[lo - start:hi - start] = x[lo:hi]
            seg *= w
            curve = masking_curve(seg, config, stereo.sample_rate)
            noise = w * synth_masked_noise(curve, config.gamma, rng, L)
            # noise lands one hop after its analysis frame
            ns = start + hop
            nlo, nhi = max(ns, 0), min(ns + L, n)
            if nlo < nhi:
                dest[nlo:nhi] += noise[nlo - ns:nhi - ns]
    return out
