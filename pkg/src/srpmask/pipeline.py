"""End-to-end localization: align, cancel, mask, and scan.

The stages before the mask (coarse alignment against array channel 1 and
the Kalman echo canceller) do not depend on the mask kind, so the multi-mask
entry point runs them once and fans out into one covariance/scan pass per
requested kind; the evaluation harness leans on that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aec import AecOutput, erle_db, run_aec
from .align import AlignmentResult, coarse_align
from .config import PipelineConfig
from .doa import DoaResult, compute_scms, srp_phat_scan, whiten
from .geometry import DoaGrid
from .masking import MaskKind, RatioMask, compute_irm, compute_irm_star, ones_mask
from .signals import MultichannelSignal, TimeSignal
from .stft import num_frames, stft


@dataclass(frozen=True, eq=False)
class PipelineArtifacts:
    """Intermediate products for inspection/dumping alongside the result."""

    alignment: AlignmentResult
    aec: AecOutput
    erle_db: float
    masks: dict[MaskKind, RatioMask]
    results: dict[MaskKind, DoaResult]


def _fit_length(samples: np.ndarray, num_samples: int) -> np.ndarray:
    if samples.shape[0] >= num_samples:
        return samples[:num_samples]
    return np.concatenate([samples, np.zeros(num_samples - samples.shape[0])])


def localize_multi(array_signal: MultichannelSignal, close_signal: TimeSignal,
                   config: PipelineConfig,
                   kinds: tuple[MaskKind, ...]) -> PipelineArtifacts:
    """Run the pipeline once and scan with every requested mask kind."""
    if array_signal.sample_rate != close_signal.sample_rate:
        raise ValueError("array and close-talk sample rates differ")
    if array_signal.num_channels != config.geometry.num_mics:
        raise ValueError(
            f"geometry expects {config.geometry.num_mics} channels, "
            f"recording has {array_signal.num_channels}")

    reference = array_signal.channel(0)
    # The delay search cannot exceed the recording itself; clamp so short
    # clips still align over every circular shift.
    frames = max(num_frames(array_signal.num_samples, config.stft),
                 num_frames(len(close_signal), config.stft))
    max_delay = min(config.max_delay_frames, frames - 1)
    alignment = coarse_align(reference, close_signal, config.stft,
                             config.beta, max_delay)
    # Frame-level alignment leaves a residual of up to +-hop/2 samples on
    # either side. A causal FIR can only cancel a reference that leads, so
    # advance the aligned close by half a hop; the echo canceller's taps
    # then see the whole residual range on the causal side.
    guard = config.stft.hop_size // 2
    aligned = TimeSignal(_fit_length(alignment.aligned_signal.samples[guard:],
                                     array_signal.num_samples),
                         close_signal.sample_rate)
    aec_out = run_aec(reference, aligned, config.aec)
    erle = erle_db(reference, aec_out.noise_estimate)

    speech_spec = stft(aec_out.echo_estimate, config.stft)
    noise_spec = stft(aec_out.noise_estimate, config.stft)
    channel_specs = [stft(ch, config.stft) for ch in array_signal.channels]
    grid = DoaGrid.azimuth_ring(config.grid_step_deg)

    masks: dict[MaskKind, RatioMask] = {}
    results: dict[MaskKind, DoaResult] = {}
    for kind in kinds:
        if kind is MaskKind.IRM:
            mask = compute_irm(speech_spec, noise_spec)
        elif kind is MaskKind.IRM_STAR:
            mask = compute_irm_star(speech_spec, noise_spec, config.alpha)
        else:
            mask = ones_mask(speech_spec.bins.shape)
        scms = compute_scms(channel_specs, mask, config.loading_rel)
        result = srp_phat_scan(whiten(scms), config.geometry, grid,
                               config.stft, config.sample_rate)
        masks[kind] = mask
        results[kind] = result
    return PipelineArtifacts(alignment, aec_out, erle, masks, results)


def localize(array_signal: MultichannelSignal, close_signal: TimeSignal,
             config: PipelineConfig, return_artifacts: bool = False):
    """Full chain with the configured mask kind; returns the DoaResult
    (or (DoaResult, PipelineArtifacts) when return_artifacts is set)."""
    artifacts = localize_multi(array_signal, close_signal, config,
                               (config.mask_kind,))
    result = artifacts.results[config.mask_kind]
    return (result, artifacts) if return_artifacts else result
