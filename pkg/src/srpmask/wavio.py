"""WAV file input/output (PCM 16-bit and IEEE float32).

Internal processing is float64; PCM data is scaled to [-1, 1) on read and
saturated on write.
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .signals import MultichannelSignal, TimeSignal


def read_wav(path) -> MultichannelSignal:
    """Read any-channel WAV into float64 channels."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"{path}: could not parse WAV file ({exc})") from exc
    if data.ndim == 1:
        data = data[:, None]
    if data.dtype == np.int16:
        scaled = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        scaled = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        scaled = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported WAV sample format {data.dtype}")
    return MultichannelSignal.from_array(scaled.T, float(rate))


def read_wav_mono(path) -> TimeSignal:
    """Read a WAV expected to hold exactly one channel."""
    multi = read_wav(path)
    if multi.num_channels != 1:
        raise ValueError(
            f"{path}: expected a mono file, found {multi.num_channels} channels")
    return multi.channel(0)


def write_wav(path, signal, encoding: str = "float32") -> None:
    """Write a TimeSignal or MultichannelSignal as float32 or pcm16."""
    if isinstance(signal, TimeSignal):
        data = signal.samples[:, None]
        rate = signal.sample_rate
    else:
        data = signal.to_array().T
        rate = signal.sample_rate
    if encoding == "float32":
        payload = data.astype(np.float32)
    elif encoding == "pcm16":
        clipped = np.clip(data, -1.0, 32767.0 / 32768.0)
        payload = np.round(clipped * 32768.0).astype(np.int16)
    else:
        raise ValueError(f"unsupported encoding {encoding!r}")
    if payload.shape[1] == 1:
        payload = payload[:, 0]
    wavfile.write(path, int(rate), payload)
