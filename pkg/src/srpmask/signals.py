"""Sampled-audio containers shared by every processing stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_sample_vector(samples) -> np.ndarray:
    """Coerce to a finite, contiguous 1-D float64 vector."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D sample vector, got shape {x.shape}")
    if x.size and not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    return x


@dataclass(frozen=True, eq=False)
class TimeSignal:
    """Single-channel signal with its sample rate in samples/sec."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "samples", as_sample_vector(self.samples))
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True, eq=False)
class MultichannelSignal:
    """Ordered bundle of synchronized channels (equal length and rate)."""

    channels: tuple[TimeSignal, ...]

    def __post_init__(self):
        chans = tuple(self.channels)
        if not chans:
            raise ValueError("need at least one channel")
        n, fs = len(chans[0]), chans[0].sample_rate
        for ch in chans[1:]:
            if len(ch) != n or ch.sample_rate != fs:
                raise ValueError("channels must share length and sample rate")
        object.__setattr__(self, "channels", chans)

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    @property
    def num_samples(self) -> int:
        return len(self.channels[0])

    @property
    def sample_rate(self) -> float:
        return self.channels[0].sample_rate

    def channel(self, m: int) -> TimeSignal:
        return self.channels[m]

    def to_array(self) -> np.ndarray:
        """Stack channels into an (M, N) array."""
        return np.stack([ch.samples for ch in self.channels])

    @classmethod
    def from_array(cls, data, sample_rate: float) -> "MultichannelSignal":
        """Build from an (M, N) array, first axis = channels."""
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"expected an (M, N) array, got shape {data.shape}")
        return cls(tuple(TimeSignal(row, sample_rate) for row in data))
