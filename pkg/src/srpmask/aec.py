"""Time-domain Kalman-filter acoustic echo cancellation.

A sample-by-sample Kalman filter identifies the FIR path from the aligned
close-talk signal into the array reference channel. The post-fit residual is
the background-noise estimate; what was removed is the speech (echo)
estimate, so noise + echo reconstructs the reference exactly.

The per-sample covariance update is O(D^2) and dominates the whole pipeline;
it runs in a compiled core when available and falls back to a NumPy kernel
otherwise (see AEC_BACKEND).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .signals import TimeSignal

try:
    from ._aec_core import kalman_aec_run as _kernel
    AEC_BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on the build environment
    from ._aec_py import kalman_aec_run as _kernel
    AEC_BACKEND = "python"
    warnings.warn("srpmask._aec_core is not built; using the pure-Python AEC "
                  "kernel (roughly an order of magnitude slower)")

# Innovation-variance floor applied before inversion: with R = y^2, a
# zero-innovation sample would otherwise divide by the prior variance alone,
# which can be vanishingly small after convergence.
S_FLOOR = 1e-10


@dataclass(frozen=True)
class AecConfig:
    """Filter length D, process-noise scale sigma, and initial P diagonal."""

    num_taps: int = 256
    process_noise: float = 1e-4
    initial_state_cov: float = 1e-2

    def __post_init__(self):
        if self.num_taps < 1:
            raise ValueError("num_taps must be >= 1")
        if not self.process_noise > 0:
            raise ValueError("process_noise must be positive")
        if not self.initial_state_cov > 0:
            raise ValueError("initial_state_cov must be positive")


@dataclass(frozen=True, eq=False)
class AecState:
    """Kalman state: FIR estimate x, covariance P, and the close-talk history
    that fills the observation row (newest sample first)."""

    state_mean: np.ndarray
    state_cov: np.ndarray
    history: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.state_mean, dtype=np.float64)
        P = np.asarray(self.state_cov, dtype=np.float64)
        h = np.asarray(self.history, dtype=np.float64)
        d = x.shape[0]
        if x.ndim != 1 or P.shape != (d, d) or h.shape != (d,):
            raise ValueError("state arrays must have shapes (D,), (D, D), (D,)")
        for arr, name in ((x, "state_mean"), (P, "state_cov"), (h, "history")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        object.__setattr__(self, "state_mean", x)
        object.__setattr__(self, "state_cov", P)
        object.__setattr__(self, "history", h)

    @property
    def num_taps(self) -> int:
        return self.state_mean.shape[0]

    @classmethod
    def initial(cls, config: AecConfig) -> "AecState":
        d = config.num_taps
        return cls(np.zeros(d), config.initial_state_cov * np.eye(d), np.zeros(d))


@dataclass(frozen=True, eq=False)
class AecOutput:
    """Residual (noise) and removed (echo) tracks plus the final state.

    noise_estimate + echo_estimate equals the reference samplewise, exactly
    by construction.
    """

    noise_estimate: TimeSignal
    echo_estimate: TimeSignal
    final_state: AecState


def _run_kernel(ref: np.ndarray, close: np.ndarray, state: AecState,
                config: AecConfig) -> tuple[np.ndarray, np.ndarray, AecState]:
    x = state.state_mean.copy()
    P = np.ascontiguousarray(state.state_cov.copy())
    h = state.history.copy()
    noise = np.empty_like(ref)
    echo = np.empty_like(ref)
    _kernel(ref, close, x, P, h, config.process_noise ** 2, S_FLOOR,
            noise, echo)
    return noise, echo, AecState(x, P, h)


def aec_step(state: AecState, config: AecConfig, ref_sample: float,
             close_sample: float) -> tuple[AecState, float, float]:
    """One Kalman update; returns (new_state, noise_sample, echo_sample).

    The close sample is pushed into the history first, so the observation
    row contains the current sample and the D-1 previous ones.
    """
    if not (np.isfinite(ref_sample) and np.isfinite(close_sample)):
        raise ValueError("samples must be finite")
    if state.num_taps != config.num_taps:
        raise ValueError("state size does not match config.num_taps")
    ref = np.array([float(ref_sample)])
    close = np.array([float(close_sample)])
    noise, echo, new_state = _run_kernel(ref, close, state, config)
    return new_state, float(noise[0]), float(echo[0])


def run_aec(array_ref: TimeSignal, aligned_close: TimeSignal,
            config: AecConfig) -> AecOutput:
    """Run the filter over whole signals from a zero-initialized state."""
    if array_ref.sample_rate != aligned_close.sample_rate:
        raise ValueError("signals must share a sample rate")
    if len(array_ref) != len(aligned_close):
        raise ValueError(
            f"length mismatch: reference has {len(array_ref)} samples, "
            f"close-talk has {len(aligned_close)}")
    noise, echo, final_state = _run_kernel(
        array_ref.samples, aligned_close.samples, AecState.initial(config),
        config)
    fs = array_ref.sample_rate
    return AecOutput(TimeSignal(noise, fs), TimeSignal(echo, fs), final_state)


def erle_db(reference: TimeSignal, noise_estimate: TimeSignal,
            tail_fraction: float = 0.5) -> float:
    """Echo return loss enhancement over the trailing part of the signals.

    10*log10 of reference-to-residual energy, evaluated on the last
    tail_fraction of the samples so the initial adaptation is excluded.
    """
    if len(reference) != len(noise_estimate):
        raise ValueError("signals must have equal length")
    start = int(len(reference) * (1.0 - tail_fraction))
    num = float(np.sum(reference.samples[start:] ** 2))
    den = float(np.sum(noise_estimate.samples[start:] ** 2))
    if den == 0.0:
        return np.inf
    return 10.0 * np.log10(num / den) if num > 0 else -np.inf
