"""Audio buffers, WAV file I/O, and deterministic test-signal synthesis.

WAV support is deliberately narrow: canonical little-endian RIFF/WAVE with
16/24-bit PCM or 32-bit float samples, mono or stereo.  Integer samples map
to [-1, 1) by 2^(bits-1), so -32768 -> -1.0 exactly and an int -> float ->
int round trip is lossless.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .rng import Rng

__all__ = [
    "AudioBuffer",
    "WavFormatError",
    "WavHeaderError",
    "read_wav",
    "write_wav",
    "synth_signal",
    "SYNTH_KINDS",
]


class WavFormatError(ValueError):
    """File is valid RIFF but uses an unsupported encoding."""


class WavHeaderError(ValueError):
    """File is truncated or not a RIFF/WAVE stream."""


@dataclass
class AudioBuffer:
    """Multichannel sample store: shape (channels, samples), float64.

    Attributes:
        data: per-channel sample rows, nominal range [-1, 1].
        sample_rate: in Hz, > 0.
    """

    data: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise ValueError(f"expected 1-D or 2-D sample array, got ndim={arr.ndim}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        self.data = arr
        self.sample_rate = int(self.sample_rate)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        """View of one channel's samples."""
        return self.data[index]

    def copy(self) -> "AudioBuffer":
        return AudioBuffer(self.data.copy(), self.sample_rate)

    def to_stereo(self) -> "AudioBuffer":
        """Duplicate a mono buffer to two identical channels; stereo passes through."""
        if self.n_channels == 2:
            return self
        if self.n_channels != 1:
            raise ValueError(f"cannot widen {self.n_channels}-channel audio to stereo")
        return AudioBuffer(np.vstack([self.data[0], self.data[0].copy()]), self.sample_rate)

    @staticmethod
    def from_channels(channels: list[np.ndarray], sample_rate: int) -> "AudioBuffer":
        lengths = {len(c) for c in channels}
        if len(lengths) > 1:
            raise ValueError(f"channels differ in length: {sorted(lengths)}")
        return AudioBuffer(np.vstack(channels), sample_rate)


# ---------------------------------------------------------------------------
# WAV reading / writing
# ---------------------------------------------------------------------------

_FMT_PCM = 0x0001
_FMT_FLOAT = 0x0003
_FMT_EXTENSIBLE = 0xFFFE


def read_wav(path) -> AudioBuffer:
    """Read a PCM16/PCM24/float32 mono or stereo WAV file.

    Raises WavHeaderError on truncated or non-RIFF input and WavFormatError
    on encodings outside the supported set.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12:
        raise WavHeaderError(f"{path}: file too short for a RIFF header")
    if raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavHeaderError(f"{path}: not a RIFF/WAVE stream")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise WavHeaderError(f"{path}: fmt chunk truncated ({len(body)} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _FMT_EXTENSIBLE:
                if len(body) < 26:
                    raise WavHeaderError(f"{path}: extensible fmt chunk truncated")
                (sub,) = struct.unpack_from("<H", body, 24)
                fmt = (sub,) + fmt[1:]
        elif cid == b"data":
            if len(body) < size:
                raise WavHeaderError(f"{path}: data chunk truncated")
            data = body
        # any other chunk (fact, LIST, ...) is skipped
        pos += 8 + size + (size & 1)

    if fmt is None:
        raise WavHeaderError(f"{path}: missing fmt chunk")
    if data is None:
        raise WavHeaderError(f"{path}: missing data chunk")

    tag, channels, rate, _byte_rate, block_align, bits = fmt
    if channels not in (1, 2):
        raise WavFormatError(f"{path}: {channels} channels unsupported (need 1 or 2)")
    if tag == _FMT_PCM and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif tag == _FMT_PCM and bits == 24:
        n = len(data) // 3
        b = np.frombuffer(data[:n * 3], dtype=np.uint8).reshape(n, 3).astype(np.uint32)
        vals = (b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)).astype(np.int32)
        vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
        samples = vals.astype(np.float64) / float(1 << 23)
    elif tag == _FMT_FLOAT and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise WavFormatError(
            f"{path}: format tag {tag} with {bits}-bit samples unsupported "
            "(need PCM 16/24-bit or float 32-bit)"
        )
    if block_align and len(samples) % channels:
        samples = samples[:len(samples) - (len(samples) % channels)]
    frames = samples.reshape(-1, channels).T
    return AudioBuffer(np.ascontiguousarray(frames), rate)


def write_wav(buffer: AudioBuffer, path, fmt: str = "float32") -> int:
    """Write ``buffer`` to a WAV file; returns the number of clipped samples.

    ``fmt`` is one of "pcm16", "pcm24", "float32".  Samples outside [-1, 1]
    are hard-clipped and counted.
    """
    if fmt not in ("pcm16", "pcm24", "float32"):
        raise ValueError(f"unknown wav format {fmt!r}")
    frames = buffer.data.T  # (samples, channels) interleave order
    clipped = int(np.count_nonzero((frames > 1.0) | (frames < -1.0)))

    if fmt == "float32":
        payload = frames.astype("<f4").tobytes()
        tag, bits = _FMT_FLOAT, 32
    elif fmt == "pcm16":
        scaled = np.rint(np.clip(frames, -1.0, 1.0) * 32768.0)
        payload = np.clip(scaled, -32768, 32767).astype("<i2").tobytes()
        tag, bits = _FMT_PCM, 16
    else:
        scaled = np.rint(np.clip(frames, -1.0, 1.0) * float(1 << 23))
        vals = np.clip(scaled, -(1 << 23), (1 << 23) - 1).astype(np.int32)
        b = np.empty((vals.size, 3), dtype=np.uint8)
        flat = vals.reshape(-1)
        b[:, 0] = flat & 0xFF
        b[:, 1] = (flat >> 8) & 0xFF
        b[:, 2] = (flat >> 16) & 0xFF
        payload = b.tobytes()
        tag, bits = _FMT_PCM, 24

    channels = buffer.n_channels
    block_align = channels * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, tag, channels, buffer.sample_rate,
        buffer.sample_rate * block_align, block_align, bits,
        b"data", len(payload),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    return clipped


# ---------------------------------------------------------------------------
# Test-signal synthesis
# ---------------------------------------------------------------------------

SYNTH_KINDS = ("white", "pink", "sine", "sweep", "speechlike")
_TARGET_RMS = 0.1  # -20 dBFS


def synth_signal(
    kind: str,
    duration: float,
    sample_rate: int,
    seed: int = 0,
    freq: float = 1000.0,
    f0: float = 100.0,
    f1: float = 10000.0,
) -> AudioBuffer:
    """Deterministic mono test signal, RMS-normalized to -20 dBFS.

    Kinds: "white" (Gaussian), "pink" (-3 dB/octave), "sine" (pure tone at
    ``freq``), "sweep" (log sweep ``f0`` -> ``f1``), "speechlike" (pink noise
    amplitude-modulated at 4 Hz).
    """
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if kind not in SYNTH_KINDS:
        raise ValueError(f"unknown signal kind {kind!r}; expected one of {SYNTH_KINDS}")
    n = int(round(duration * sample_rate))
    rng = Rng(seed).split(f"synth/{kind}")
    t = np.arange(n) / sample_rate

    if kind == "white":
        x = rng.normal_array(n)
    elif kind == "sine":
        x = np.sin(2.0 * np.pi * freq * t)
    elif kind == "sweep":
        if not 0 < f0 < sample_rate / 2 or not 0 < f1 < sample_rate / 2:
            raise ValueError(f"sweep endpoints out of range: {f0}..{f1} at fs={sample_rate}")
        x = scipy.signal.chirp(t, f0=f0, f1=f1, t1=duration, method="logarithmic")
    else:  # pink / speechlike
        x = _pink_noise(n, rng)
        if kind == "speechlike":
            x *= 0.5 * (1.0 + np.sin(2.0 * np.pi * 4.0 * t))

    rms = float(np.sqrt(np.mean(x * x)))
    if rms > 0:
        x *= _TARGET_RMS / rms
    return AudioBuffer(x, sample_rate)


def _pink_noise(n: int, rng: Rng) -> np.ndarray:
    """Gaussian noise shaped to a 1/f power spectrum (zero DC)."""
    white = rng.normal_array(n)
    spectrum = np.fft.rfft(white)
    k = np.arange(len(spectrum), dtype=np.float64)
    k[0] = 1.0
    spectrum /= np.sqrt(k)
    spectrum[0] = 0.0
    return np.fft.irfft(spectrum, n)
