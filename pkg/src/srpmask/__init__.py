"""Selective sound source localization toolkit.

Given an asynchronous close-talking microphone recording and a synchronized
M-channel array recording, estimates the talker's direction of arrival while
suppressing interference: coarse frame alignment, Kalman-filter echo
cancellation, ratio-mask estimation, and mask-weighted SRP-PHAT, plus a
free-field scene simulator and an evaluation harness.
"""

from .aec import (AEC_BACKEND, AecConfig, AecOutput, AecState, aec_step,
                  erle_db, run_aec)
from .align import AlignmentResult, coarse_align, frame_xcorr_phat
from .config import PipelineConfig, load_pipeline_config
from .doa import (DoaResult, ScmPair, compute_scms, power_map_to_csv,
                  srp_phat_scan, steering_phase, whiten)
from .geometry import ArrayGeometry, DoaGrid, azimuth_to_direction
from .masking import (MaskKind, RatioMask, compute_irm, compute_irm_star,
                      mask_to_csv, ones_mask, read_mask, write_mask)
from .metrics import accuracy_within, aggregate, angular_error
from .pipeline import PipelineArtifacts, localize, localize_multi
from .signals import MultichannelSignal, TimeSignal
from .sim import (SceneSpec, fractional_delay, pad_to_window, render_scene,
                  synth_speech_like)
from .stft import (Spectrogram, StftConfig, istft, magnitude_compress,
                   num_frames, stft)
from .wavio import read_wav, read_wav_mono, write_wav

__version__ = "0.1.0"

__all__ = [
    "AEC_BACKEND", "AecConfig", "AecOutput", "AecState", "aec_step",
    "erle_db", "run_aec", "AlignmentResult", "coarse_align",
    "frame_xcorr_phat", "PipelineConfig", "load_pipeline_config", "DoaResult",
    "ScmPair", "compute_scms", "power_map_to_csv", "srp_phat_scan",
    "steering_phase", "whiten", "ArrayGeometry", "DoaGrid",
    "azimuth_to_direction", "MaskKind", "RatioMask", "compute_irm",
    "compute_irm_star", "mask_to_csv", "ones_mask", "read_mask", "write_mask",
    "accuracy_within", "aggregate", "angular_error", "PipelineArtifacts",
    "localize", "localize_multi", "MultichannelSignal", "TimeSignal",
    "SceneSpec", "fractional_delay", "pad_to_window", "render_scene",
    "synth_speech_like",
    "Spectrogram", "StftConfig", "istft", "magnitude_compress", "num_frames",
    "stft", "read_wav", "read_wav_mono", "write_wav",
]
