"""Time-frequency ratio masks selecting speech-dominated bins.

The plain ratio mask weighs each bin by speech power over speech-plus-noise
power. The floored variant adds a per-frequency mean noise power, scaled by
alpha, to the denominator; it never exceeds the plain mask and suppresses
bins whose instantaneous noise estimate dips below the noise floor. The ONES
kind is the no-mask baseline.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .stft import Spectrogram

_MASK_MAGIC = b"RMSK"
_MASK_DTYPE_F32 = 1


class MaskKind(Enum):
    IRM = "irm"
    IRM_STAR = "irm-star"
    ONES = "none"


@dataclass(frozen=True, eq=False)
class RatioMask:
    """Real (L, F) matrix of per-bin weights in [0, 1]."""

    values: np.ndarray
    kind: MaskKind
    alpha: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {v.shape}")
        if v.size and (not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0):
            raise ValueError("mask values must be finite and within [0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def _power_pair(speech_spec: Spectrogram, noise_spec: Spectrogram):
    if speech_spec.bins.shape != noise_spec.bins.shape:
        raise ValueError(
            f"shape mismatch: speech {speech_spec.bins.shape} vs noise "
            f"{noise_spec.bins.shape}")
    return np.abs(speech_spec.bins) ** 2, np.abs(noise_spec.bins) ** 2


def _guarded_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # 0/0 bins carry no speech evidence and get weight 0; their complement
    # (1 - mask) = 1 feeds the noise statistics harmlessly.
    return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)


def compute_irm(speech_spec: Spectrogram, noise_spec: Spectrogram) -> RatioMask:
    """Ratio mask |X|^2 / (|X|^2 + |B|^2), entrywise."""
    px, pb = _power_pair(speech_spec, noise_spec)
    return RatioMask(_guarded_ratio(px, px + pb), MaskKind.IRM)


def compute_irm_star(speech_spec: Spectrogram, noise_spec: Spectrogram,
                     alpha: float) -> RatioMask:
    """Ratio mask with a per-frequency noise floor alpha * mean_l |B|^2."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    px, pb = _power_pair(speech_spec, noise_spec)
    floor = alpha * pb.mean(axis=0, keepdims=True)
    return RatioMask(_guarded_ratio(px, px + pb + floor), MaskKind.IRM_STAR,
                     alpha)


def ones_mask(shape: tuple[int, int]) -> RatioMask:
    """The all-ones baseline mask (no selectivity)."""
    return RatioMask(np.ones(shape), MaskKind.ONES)


def write_mask(path, mask: RatioMask) -> None:
    """Dump mask values: 16-byte header (magic, L, F, dtype tag) then
    row-major float32 payload."""
    values = mask.values.astype(np.float32)
    n_frames, n_bins = values.shape
    header = _MASK_MAGIC + struct.pack("<III", n_frames, n_bins,
                                       _MASK_DTYPE_F32)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes(order="C"))


def read_mask(path) -> np.ndarray:
    """Read a mask dump back as an (L, F) float32 array."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != _MASK_MAGIC:
            raise ValueError(f"{path}: not a mask dump (bad header)")
        n_frames, n_bins, tag = struct.unpack("<III", header[4:])
        if tag != _MASK_DTYPE_F32:
            raise ValueError(f"{path}: unsupported dtype tag {tag}")
        payload = fh.read(4 * n_frames * n_bins)
    if len(payload) != 4 * n_frames * n_bins:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype="<f4").reshape(n_frames, n_bins)


def mask_to_csv(path, mask: RatioMask) -> None:
    """CSV export (one row per frame) for external plotting."""
    np.savetxt(path, mask.values, fmt="%.6f", delimiter=",")
