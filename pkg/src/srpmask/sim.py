"""Free-field scene synthesis used as ground truth for end-to-end tests.

Renders a far-field target (and optional interferer) onto the array by
applying per-microphone plane-wave delays with windowed-sinc interpolation,
adds spatially white Gaussian noise, and produces the matching asynchronous
close-talk recording. The fractional delays are implemented independently of
the STFT machinery under test, so simulator and pipeline cannot share bugs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .geometry import ArrayGeometry, azimuth_to_direction
from .signals import MultichannelSignal, TimeSignal

# Common bulk delay applied to every array channel: keeps the sinc stencil
# causal for mics closest to the source and places the close-to-array FIR
# path safely inside the echo canceller's default tap range.
_BULK_DELAY_SAMPLES = 96

_SINC_TAPS = 32
_KAISER_BETA = 8.6


def fractional_delay(x: np.ndarray, delay_samples: float,
                     out_len: int | None = None,
                     num_taps: int = _SINC_TAPS) -> np.ndarray:
    """y[n] ~ x[n - delay] via Kaiser-windowed sinc interpolation.

    Handles arbitrary real delays (negative = advance). The output is
    zero-filled where the interpolation stencil leaves the input.
    """
    x = np.asarray(x, dtype=np.float64)
    if out_len is None:
        out_len = x.shape[0]
    whole = int(np.floor(delay_samples))
    frac = delay_samples - whole
    half = num_taps // 2
    k = np.arange(-half + 1, half + 1)
    t = k - frac
    window = np.i0(_KAISER_BETA * np.sqrt(np.maximum(
        0.0, 1.0 - (t / half) ** 2))) / np.i0(_KAISER_BETA)
    kernel = np.sinc(t) * window
    conv = np.convolve(x, kernel)
    y = np.zeros(out_len)
    # y[n] = conv[n - whole - k_min] with k_min = -half + 1.
    src = np.arange(out_len) - whole + (half - 1)
    valid = (src >= 0) & (src < conv.shape[0])
    y[valid] = conv[src[valid]]
    return y


@dataclass(frozen=True)
class SceneSpec:
    """Scene description: who speaks from where, and how dirty the mix is.

    snr_db is the ratio of target power to combined interference-plus-noise
    power at the array; None renders a clean scene. Target power is taken
    over the target's nonzero support, so a push-to-talk utterance padded
    with exact zeros inside a longer window is rated by its level while the
    operator speaks, with interference running over the whole window. When
    both an interferer and noise are present the interference budget is
    split equally between them. wireless_delay_samples delays only the
    close-talk channel.
    """

    geometry: ArrayGeometry
    target_azimuth_deg: float
    target_distance_m: float = 3.0
    interferer_azimuth_deg: float | None = None
    snr_db: float | None = None
    include_noise: bool = True
    wireless_delay_samples: int = 0
    close_ir: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "target_azimuth_deg",
                           float(self.target_azimuth_deg) % 360.0)
        if self.interferer_azimuth_deg is not None:
            object.__setattr__(self, "interferer_azimuth_deg",
                               float(self.interferer_azimuth_deg) % 360.0)
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite (or None for clean)")
        if self.wireless_delay_samples < 0:
            raise ValueError("wireless_delay_samples must be >= 0")
        if not self.target_distance_m > 0:
            raise ValueError("target_distance_m must be positive")


def _render_farfield(dry: np.ndarray, geometry: ArrayGeometry,
                     azimuth_deg: float, sample_rate: float,
                     out_len: int) -> np.ndarray:
    """Plane-wave rendering: one fractionally delayed copy per microphone."""
    direction = azimuth_to_direction(azimuth_deg)
    delays = (-geometry.positions @ direction) * sample_rate / \
        geometry.speed_of_sound + _BULK_DELAY_SAMPLES
    return np.stack([fractional_delay(dry, d, out_len) for d in delays])


def render_scene(spec: SceneSpec, target_dry: TimeSignal,
                 interferer_dry: TimeSignal | None = None
                 ) -> tuple[MultichannelSignal, TimeSignal, float]:
    """Render (array recording, close-talk recording, truth azimuth).

    The close channel is the target convolved with close_ir (default: unit
    impulse), delayed by wireless_delay_samples and free of noise.
    """
    fs = target_dry.sample_rate
    if interferer_dry is not None and interferer_dry.sample_rate != fs:
        raise ValueError("target and interferer sample rates differ")
    if spec.interferer_azimuth_deg is not None and interferer_dry is None:
        raise ValueError("scene asks for an interferer but none was given")

    rng = np.random.default_rng(spec.seed)
    out_len = len(target_dry) + _BULK_DELAY_SAMPLES + _SINC_TAPS
    target_arr = _render_farfield(target_dry.samples, spec.geometry,
                                  spec.target_azimuth_deg, fs, out_len)
    mix = target_arr.copy()

    if spec.snr_db is not None:
        active = max(1, int(np.count_nonzero(target_dry.samples)))
        target_power = np.sum(target_arr ** 2) / (target_arr.shape[0] * active)
        budget = target_power * 10.0 ** (-spec.snr_db / 10.0)
        parts = []
        if interferer_dry is not None:
            interferer_arr = _render_farfield(
                interferer_dry.samples, spec.geometry,
                spec.interferer_azimuth_deg, fs, out_len)
            parts.append(interferer_arr)
        if spec.include_noise:
            parts.append(rng.standard_normal(mix.shape))
        share = budget / len(parts) if parts else 0.0
        for part in parts:
            power = np.mean(part ** 2)
            if power > 0:
                mix += part * np.sqrt(share / power)

    close = target_dry.samples
    if spec.close_ir is not None:
        close = np.convolve(close, np.asarray(spec.close_ir, dtype=np.float64))
    if spec.wireless_delay_samples:
        close = np.concatenate([np.zeros(spec.wireless_delay_samples), close])
    return (MultichannelSignal.from_array(mix, fs), TimeSignal(close, fs),
            spec.target_azimuth_deg)


def pad_to_window(signal: TimeSignal, window_s: float) -> TimeSignal:
    """Embed a push-to-talk utterance in a longer window of exact zeros.

    The utterance starts a third of the way into the padding, off-center but
    deterministic. Exact zeros matter: scene SNR is rated against the
    target's nonzero support.
    """
    n_total = int(round(window_s * signal.sample_rate))
    if n_total < len(signal):
        raise ValueError("window is shorter than the utterance")
    head = (n_total - len(signal)) // 3
    tail = n_total - len(signal) - head
    return TimeSignal(np.concatenate([np.zeros(head), signal.samples,
                                      np.zeros(tail)]), signal.sample_rate)


def synth_speech_like(duration_s: float, seed: int,
                      sample_rate: float = 16000.0) -> TimeSignal:
    """Deterministic speech-shaped test signal.

    Filtered noise with formant-band emphasis under a syllabic (4 Hz)
    envelope plus a slower random level contour; non-stationary by
    construction, decorrelated across seeds.
    """
    if not duration_s > 0:
        raise ValueError("duration_s must be positive")
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    excitation = rng.standard_normal(n)

    # Three resonators standing in for formants; gains taper upward.
    out = np.zeros(n)
    for freq, bw, gain in ((500.0, 120.0, 1.0), (1400.0, 200.0, 0.6),
                           (2600.0, 300.0, 0.35)):
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2.0 * np.pi * freq / sample_rate
        b, a = [1.0 - r], [1.0, -2.0 * r * np.cos(theta), r * r]
        out += gain * lfilter(b, a, excitation)

    t = np.arange(n) / sample_rate
    syllabic = 0.5 * (1.0 + np.sin(2.0 * np.pi * 4.0 * t
                                   + rng.uniform(0.0, 2.0 * np.pi)))
    # Slow random contour: piecewise-linear between 2 Hz knots.
    knots = rng.uniform(0.4, 1.0, size=max(2, int(2 * duration_s) + 2))
    contour = np.interp(t, np.linspace(0.0, duration_s, knots.size), knots)
    envelope = (0.1 + 0.9 * syllabic ** 1.5) * contour
    out *= envelope
    peak = np.max(np.abs(out))
    if peak > 0:
        out *= 0.5 / peak
    return TimeSignal(out, sample_rate)
