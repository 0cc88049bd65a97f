"""Coarse frame-level alignment of the close-talk channel to the array.

The wireless link delays the close-talk recording by an unknown, random
amount. Alignment correlates the beta-compressed magnitude envelopes of both
spectrograms along the frame axis, one frequency bin at a time, with PHAT
normalization, and picks the frame offset whose correlation summed across
bins is largest. Residual sub-frame misalignment (up to half a hop either
way) is left for the echo canceller's FIR taps to absorb.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import TimeSignal
from .stft import Spectrogram, StftConfig, compress_magnitudes, istft, stft

# Absolute floor for the PHAT denominator; bins whose envelope spectra fall
# below it contribute nothing instead of amplifying numerical noise.
_PHAT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    """Recovered frame delay, its score curve, and the realigned signal.

    frame_delay > 0 means the close channel arrived later than the array
    channel; the aligned signal advances it by that many frames.
    """

    frame_delay: int
    offsets: np.ndarray
    score_curve: np.ndarray
    aligned_signal: TimeSignal

    def __post_init__(self):
        if self.offsets.shape != self.score_curve.shape:
            raise ValueError("offsets and score_curve must have equal shape")


def _padded_envelopes(ref_spec: Spectrogram, close_spec: Spectrogram,
                      beta: float) -> tuple[np.ndarray, np.ndarray]:
    if ref_spec.config != close_spec.config:
        raise ValueError("spectrograms must share the same STFT config")
    n_frames = max(ref_spec.num_frames, close_spec.num_frames)

    def env(spec):
        e = compress_magnitudes(np.abs(spec.bins), beta)
        if e.shape[0] < n_frames:
            e = np.pad(e, ((0, n_frames - e.shape[0]), (0, 0)))
        return e

    return env(ref_spec), env(close_spec)


def frame_xcorr_phat(ref_spec: Spectrogram, close_spec: Spectrogram,
                     beta: float) -> np.ndarray:
    """PHAT-normalized circular cross-correlation along the frame axis.

    Returns a real (L, F) matrix: row tau holds, per frequency bin, the
    correlation of the close envelope against the reference envelope at a
    circular frame lag of tau (negative lags wrap to rows L - |tau|). The
    shorter spectrogram is zero-padded to the longer one's frame count.
    """
    env_ref, env_close = _padded_envelopes(ref_spec, close_spec, beta)
    n_frames = env_ref.shape[0]
    spec_ref = np.fft.fft(env_ref, axis=0)
    spec_close = np.fft.fft(env_close, axis=0)
    cross = spec_close * np.conj(spec_ref)
    denom = np.abs(spec_close) * np.abs(spec_ref)
    normalized = np.where(denom > _PHAT_FLOOR, cross / np.maximum(denom, _PHAT_FLOOR), 0.0)
    # Inverse transform without the 1/L factor; conjugate symmetry of the
    # normalized cross-spectrum makes the result real up to rounding.
    corr = n_frames * np.fft.ifft(normalized, axis=0)
    return corr.real


def coarse_align(array_ref: TimeSignal, close: TimeSignal, config: StftConfig,
                 beta: float, max_delay_frames: int) -> AlignmentResult:
    """Estimate and remove the integer-frame delay of the close channel.

    Searches tau in [-max_delay_frames, +max_delay_frames]; ties resolve to
    the smallest |tau|, then the smallest tau. The aligned signal is the
    inverse STFT of the frame-shifted close spectrogram, zero-filled where
    the shift runs off the recording.
    """
    if array_ref.sample_rate != close.sample_rate:
        raise ValueError("signals must share a sample rate")
    if max_delay_frames < 0:
        raise ValueError("max_delay_frames must be nonnegative")
    ref_spec = stft(array_ref, config)
    close_spec = stft(close, config)
    corr = frame_xcorr_phat(ref_spec, close_spec, beta)
    n_frames = corr.shape[0]
    if max_delay_frames >= n_frames:
        raise ValueError(
            f"max_delay_frames={max_delay_frames} must be smaller than the "
            f"frame count {n_frames}")

    score_full = corr.sum(axis=1)
    offsets = np.arange(-max_delay_frames, max_delay_frames + 1)
    scores = score_full[offsets % n_frames]
    best = np.max(scores)
    candidates = offsets[scores == best]
    order = np.lexsort((candidates, np.abs(candidates)))
    frame_delay = int(candidates[order[0]])

    # Advance the close spectrogram by frame_delay: shifted[l] = close[l + tau].
    close_frames = close_spec.num_frames
    shifted = np.zeros((n_frames, close_spec.num_bins), dtype=np.complex128)
    dst_lo = max(0, -frame_delay)
    dst_hi = min(n_frames, close_frames - frame_delay)
    if dst_hi > dst_lo:
        shifted[dst_lo:dst_hi] = close_spec.bins[dst_lo + frame_delay:
                                                 dst_hi + frame_delay]
    aligned = istft(Spectrogram(shifted, config, close.sample_rate))
    return AlignmentResult(frame_delay, offsets, scores, aligned)
