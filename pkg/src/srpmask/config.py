"""Pipeline configuration: experiment defaults plus config-file parsing.

The [pipeline] section of a config file mirrors the experiment parameter
names (sample_rate, speed_of_sound, frame_size, hop_size, alpha, beta,
sigma, ...) so a file with no entries reproduces the reference setup:
fs=16000, c=343, N=512, hop=128, alpha=0.05, beta=0.25, sigma=1e-4.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .aec import AecConfig
from .geometry import ArrayGeometry
from .masking import MaskKind
from .stft import StftConfig


def _default_geometry() -> ArrayGeometry:
    return ArrayGeometry.circular(num_mics=16, radius=0.516,
                                  speed_of_sound=343.0)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the full localization chain needs."""

    stft: StftConfig = field(default_factory=StftConfig)
    sample_rate: float = 16000.0
    beta: float = 0.25
    aec: AecConfig = field(default_factory=AecConfig)
    alpha: float = 0.05
    mask_kind: MaskKind = MaskKind.IRM_STAR
    geometry: ArrayGeometry = field(default_factory=_default_geometry)
    grid_step_deg: float = 1.0
    loading_rel: float = 1e-3
    max_delay_frames: int = 250

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.loading_rel < 0:
            raise ValueError("loading_rel must be nonnegative")
        if self.max_delay_frames < 0:
            raise ValueError("max_delay_frames must be nonnegative")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")


def load_pipeline_config(path=None, overrides: dict | None = None
                         ) -> PipelineConfig:
    """Build a PipelineConfig from an INI-style file plus overrides.

    Unknown keys raise, so typos in config files fail loudly. overrides uses
    the same key names (strings) and wins over the file.
    """
    values: dict[str, str] = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise FileNotFoundError(f"config file not found: {path}")
        if parser.has_section("pipeline"):
            values.update(parser["pipeline"])
    if overrides:
        values.update({k: str(v) for k, v in overrides.items()})

    known = {
        "sample_rate", "speed_of_sound", "frame_size", "hop_size", "window",
        "alpha", "beta", "sigma", "num_taps", "initial_state_cov",
        "loading_rel", "grid_deg", "mask", "num_mics", "array_radius_m",
        "max_delay_frames",
    }
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown pipeline config keys: {sorted(unknown)}")

    def fget(key, default):
        return float(values.get(key, default))

    def iget(key, default):
        return int(values.get(key, default))

    stft = StftConfig(frame_size=iget("frame_size", 512),
                      hop_size=iget("hop_size", 128),
                      window=values.get("window", "hann"))
    aec = AecConfig(num_taps=iget("num_taps", 256),
                    process_noise=fget("sigma", 1e-4),
                    initial_state_cov=fget("initial_state_cov", 1e-2))
    geometry = ArrayGeometry.circular(
        num_mics=iget("num_mics", 16),
        radius=fget("array_radius_m", 0.516),
        speed_of_sound=fget("speed_of_sound", 343.0))
    return PipelineConfig(
        stft=stft,
        sample_rate=fget("sample_rate", 16000.0),
        beta=fget("beta", 0.25),
        aec=aec,
        alpha=fget("alpha", 0.05),
        mask_kind=MaskKind(values.get("mask", "irm-star")),
        geometry=geometry,
        grid_step_deg=fget("grid_deg", 1.0),
        loading_rel=fget("loading_rel", 1e-3),
        max_delay_frames=iget("max_delay_frames", 250),
    )


def with_mask_kind(config: PipelineConfig, kind: MaskKind) -> PipelineConfig:
    return replace(config, mask_kind=kind)
