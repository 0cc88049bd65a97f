"""Windowed STFT analysis/synthesis and spectral utilities.

Conventions: one-sided spectra (F = N/2 + 1 bins), frame l covers samples
[l*hop, l*hop + frame_size), the tail frame is zero-padded, and synthesis is
weighted overlap-add with the analysis window and division by the accumulated
squared window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signals import TimeSignal

_WINDOW_KINDS = ("hann", "rect")

# Accumulated squared-window coverage below this fraction of its own maximum
# means some samples are effectively unreconstructable.
_COLA_MIN_COVERAGE = 1e-3

# Samples where the OLA denominator falls below this (relative) level are
# emitted as zero instead of being amplified out of a near-empty bucket.
_SYNTH_DENOM_FLOOR = 1e-8


def window_samples(kind: str, frame_size: int) -> np.ndarray:
    """Analysis window coefficients (periodic form, for STFT use)."""
    if kind == "hann":
        n = np.arange(frame_size)
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / frame_size)
    if kind == "rect":
        return np.ones(frame_size)
    raise ValueError(f"unknown window kind {kind!r}, expected one of {_WINDOW_KINDS}")


@dataclass(frozen=True)
class StftConfig:
    """Frame size N, hop size, and analysis window kind."""

    frame_size: int = 512
    hop_size: int = 128
    window: str = "hann"

    def __post_init__(self):
        if self.frame_size <= 0 or self.frame_size % 2 != 0:
            raise ValueError("frame_size must be a positive even integer")
        if not 0 < self.hop_size <= self.frame_size:
            raise ValueError("hop_size must satisfy 0 < hop_size <= frame_size")
        if self.window not in _WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.window!r}")

    @property
    def num_bins(self) -> int:
        return self.frame_size // 2 + 1

    def window_array(self) -> np.ndarray:
        return window_samples(self.window, self.frame_size)


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Complex (L, F) time-frequency matrix with its analysis config."""

    bins: np.ndarray
    config: StftConfig
    sample_rate: float

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.complex128)
        if b.ndim != 2 or b.shape[1] != self.config.num_bins:
            raise ValueError(
                f"bins must be (L, {self.config.num_bins}), got shape {b.shape}")
        if b.size and not np.all(np.isfinite(b)):
            raise ValueError("spectrogram contains non-finite values")
        object.__setattr__(self, "bins", b)

    @property
    def num_frames(self) -> int:
        return self.bins.shape[0]

    @property
    def num_bins(self) -> int:
        return self.bins.shape[1]


def num_frames(num_samples: int, config: StftConfig) -> int:
    """Frames needed to cover num_samples (tail frame zero-padded)."""
    if num_samples < config.frame_size:
        raise ValueError(
            f"signal of {num_samples} samples is shorter than one frame "
            f"({config.frame_size})")
    return 1 + math.ceil((num_samples - config.frame_size) / config.hop_size)


def stft(signal: TimeSignal, config: StftConfig) -> Spectrogram:
    """One-sided STFT of a signal; linear in the input.

    Frame l covers samples [l*hop, l*hop + N); the final partial frame is
    zero-padded so the frame count is deterministic from the length.
    """
    x = signal.samples
    n_frames = num_frames(x.shape[0], config)
    hop, frame = config.hop_size, config.frame_size
    padded_len = (n_frames - 1) * hop + frame
    if padded_len > x.shape[0]:
        x = np.concatenate([x, np.zeros(padded_len - x.shape[0])])
    frames = np.lib.stride_tricks.sliding_window_view(x, frame)[::hop]
    bins = np.fft.rfft(frames * config.window_array(), axis=1)
    return Spectrogram(bins, config, signal.sample_rate)


def check_overlap_add(config: StftConfig) -> None:
    """Raise if the window/hop pair leaves gaps the synthesis cannot fill."""
    w2 = config.window_array() ** 2
    hop, frame = config.hop_size, config.frame_size
    n_test = 3 * math.ceil(frame / hop)
    cover = np.zeros((n_test - 1) * hop + frame)
    for l in range(n_test):
        cover[l * hop:l * hop + frame] += w2
    interior = cover[frame:-frame]
    if interior.min() < _COLA_MIN_COVERAGE * cover.max():
        raise ValueError(
            f"window {config.window!r} with hop {hop}/{frame} violates the "
            "overlap-add constraint; reconstruction would be ill-conditioned")


def istft(spec: Spectrogram) -> TimeSignal:
    """Weighted overlap-add synthesis (same window, squared-window norm).

    Round trip stft -> istft reproduces the interior of the input (the first
    and last frame_size - hop_size samples are edge-attenuated).
    """
    config = spec.config
    check_overlap_add(config)
    hop, frame = config.hop_size, config.frame_size
    win = config.window_array()
    n_frames = spec.num_frames
    out_len = (n_frames - 1) * hop + frame
    out = np.zeros(out_len)
    denom = np.zeros(out_len)
    frames = np.fft.irfft(spec.bins, n=frame, axis=1) * win
    w2 = win ** 2
    for l in range(n_frames):
        out[l * hop:l * hop + frame] += frames[l]
        denom[l * hop:l * hop + frame] += w2
    good = denom > _SYNTH_DENOM_FLOOR * denom.max()
    out[good] /= denom[good]
    out[~good] = 0.0
    return TimeSignal(out, spec.sample_rate)


def compress_magnitudes(mag: np.ndarray, beta: float) -> np.ndarray:
    """Entrywise mag**beta with the 0**0 corner pinned to 0."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if beta == 0.0:
        return np.where(mag > 0.0, 1.0, 0.0)
    return np.power(mag, beta)


def magnitude_compress(spec: Spectrogram, beta: float) -> np.ndarray:
    """Compressed magnitude envelope |bins|**beta, shape (L, F).

    beta < 1 squashes large amplitudes toward a log-like scale while staying
    near-linear for small ones; beta = 0 maps every nonzero magnitude to 1
    and zero to 0 (documented convention).
    """
    return compress_magnitudes(np.abs(spec.bins), beta)
