"""The P1-P6 preset matrix and the dispatching entry point.

P1-P3 run the proposed pipeline (shaped comb-allpass, then masked noise:
the masking model should see the phase-scrambled but magnitude-flat output),
trading quality for decorrelation as beta falls and gamma rises.  P4-P5 are
the smoothed-absolute-value baseline, P6 the sample-varying first-order
allpass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

from .audio import AudioBuffer
from .baselines import first_order_allpass, smoothed_abs
from .masking import NoiseConfig, inject_noise
from .rng import derive_seed
from .scal import ScalConfig, scal_process

__all__ = ["PresetConfig", "PRESETS", "preset_ids", "apply_preset"]

_ALGORITHMS = ("proposed", "smoothed_abs", "first_order_allpass")


@dataclass(frozen=True)
class PresetConfig:
    """One named configuration: algorithm choice plus its constants."""

    id: str
    algorithm: str
    parameters: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))


PRESETS: dict[str, PresetConfig] = {
    "P1": PresetConfig("P1", "proposed", {"beta": 0.62, "gamma": 0.6}),
    "P2": PresetConfig("P2", "proposed", {"beta": 0.36, "gamma": 1.0}),
    "P3": PresetConfig("P3", "proposed", {"beta": 0.18, "gamma": 1.67}),
    "P4": PresetConfig("P4", "smoothed_abs", {"alpha": 0.3}),
    "P5": PresetConfig("P5", "smoothed_abs", {"alpha": 0.6}),
    "P6": PresetConfig("P6", "first_order_allpass", {"alpha_min": -0.985}),
}


def preset_ids() -> list[str]:
    return list(PRESETS)


def apply_preset(stereo: AudioBuffer, preset: PresetConfig | str, seed: int = 0) -> AudioBuffer:
    """Run one preset on a stereo buffer, deterministically under ``seed``."""
    if isinstance(preset, str):
        try:
            preset = PRESETS[preset]
        except KeyError:
            raise ValueError(
                f"unknown preset {preset!r}; valid presets: {', '.join(PRESETS)}"
            ) from None
    p = preset.parameters
    if preset.algorithm == "proposed":
        filtered = scal_process(
            stereo,
            ScalConfig(beta=p["beta"]),
            seed=derive_seed(seed, "stage/scal"),
        )
        return inject_noise(
            filtered,
            NoiseConfig(gamma=p["gamma"]),
            seed=derive_seed(seed, "stage/noise"),
        )
    if preset.algorithm == "smoothed_abs":
        return smoothed_abs(stereo, alpha=p["alpha"])
    return first_order_allpass(stereo, alpha_min=p["alpha_min"], seed=seed)
