"""Coarse frame alignment and the per-bin envelope correlation."""

import numpy as np
import pytest

from srpmask import (SceneSpec, Spectrogram, StftConfig, TimeSignal,
                     coarse_align, frame_xcorr_phat, render_scene,
                     synth_speech_like)
from srpmask.geometry import ArrayGeometry

FS = 16000.0
CFG = StftConfig(frame_size=512, hop_size=128)


def _spec_from_mags(mags, rng):
    """Complex spectrogram with given magnitudes and random phases."""
    phases = rng.uniform(0, 2 * np.pi, mags.shape)
    return Spectrogram(mags * np.exp(1j * phases), StftConfig(16, 4), FS)


def _xcorr_oracle(env_ref, env_close):
    """Straight-line Eqs.: envelope DFT, PHAT normalization, inverse sum."""
    n, f_bins = env_ref.shape
    out = np.zeros((n, f_bins))
    for f in range(f_bins):
        r_u = np.array([np.sum(env_ref[:, f] *
                               np.exp(-2j * np.pi * k * np.arange(n) / n))
                        for k in range(n)])
        r_c = np.array([np.sum(env_close[:, f] *
                               np.exp(-2j * np.pi * k * np.arange(n) / n))
                        for k in range(n)])
        num = r_c * np.conj(r_u)
        den = np.abs(r_c) * np.abs(r_u)
        norm = np.where(den > 1e-12, num / np.maximum(den, 1e-12), 0.0)
        for tau in range(n):
            out[tau, f] = np.real(
                np.sum(norm * np.exp(2j * np.pi * tau * np.arange(n) / n)))
    return out


def test_xcorr_matches_straightline_oracle():
    rng = np.random.default_rng(0)
    mags = rng.uniform(0.1, 2.0, (12, 9))
    ref = _spec_from_mags(mags, rng)
    close = _spec_from_mags(np.roll(mags, 3, axis=0), rng)
    got = frame_xcorr_phat(ref, close, beta=0.25)
    oracle = _xcorr_oracle(mags ** 0.25, np.roll(mags, 3, axis=0) ** 0.25)
    np.testing.assert_allclose(got, oracle, atol=1e-9)


def test_xcorr_peak_at_shift():
    # Close envelope = ref envelope delayed by 10 frames -> row tau=10 wins.
    rng = np.random.default_rng(1)
    mags = rng.uniform(0.1, 2.0, (64, 9))
    shifted = np.roll(mags, 10, axis=0)
    corr = frame_xcorr_phat(_spec_from_mags(mags, rng),
                            _spec_from_mags(shifted, rng), beta=0.25)
    assert (corr.argmax(axis=0) == 10).all()


def test_xcorr_identical_envelopes_peak_at_zero():
    rng = np.random.default_rng(2)
    mags = rng.uniform(0.1, 2.0, (32, 9))
    corr = frame_xcorr_phat(_spec_from_mags(mags, rng),
                            _spec_from_mags(mags, rng), beta=0.25)
    assert (corr.argmax(axis=0) == 0).all()


def test_xcorr_independent_noise_has_no_sharp_peak():
    # Peak-to-mean of the summed curve: a genuine shift stands out at least
    # 10x more than independent white envelopes do (seeded Monte Carlo).
    rng = np.random.default_rng(3)

    def peak_ratio(env_a, env_b):
        corr = frame_xcorr_phat(_spec_from_mags(env_a, rng),
                                _spec_from_mags(env_b, rng), beta=0.25)
        curve = corr.sum(axis=1)
        return curve.max() / np.abs(curve).mean()

    mags = rng.uniform(0.1, 2.0, (128, 9))
    shifted_ratio = peak_ratio(mags, np.roll(mags, 7, axis=0))
    noise_ratios = [peak_ratio(rng.uniform(0.1, 2.0, (128, 9)),
                               rng.uniform(0.1, 2.0, (128, 9)))
                    for _ in range(5)]
    assert shifted_ratio > 10 * max(noise_ratios)


def test_xcorr_rejects_mismatched_configs():
    rng = np.random.default_rng(4)
    a = Spectrogram(rng.standard_normal((4, 9)) + 0j, StftConfig(16, 4), FS)
    b = Spectrogram(rng.standard_normal((4, 17)) + 0j, StftConfig(32, 8), FS)
    with pytest.raises(ValueError):
        frame_xcorr_phat(a, b, 0.25)


def test_exact_frame_delay_recovered_and_realigned():
    ref = synth_speech_like(2.0, 10)
    delay = 10 * CFG.hop_size  # 1280 samples
    close = TimeSignal(np.concatenate([np.zeros(delay), ref.samples]), FS)
    result = coarse_align(ref, close, CFG, beta=0.25, max_delay_frames=40)
    assert result.frame_delay == 10
    n = len(ref)
    edge = 4 * CFG.frame_size
    a = ref.samples[edge:n - edge]
    b = result.aligned_signal.samples[edge:n - edge]
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-3


def test_zero_delay_recovered():
    ref = synth_speech_like(1.5, 11)
    result = coarse_align(ref, ref, CFG, beta=0.25, max_delay_frames=30)
    assert result.frame_delay == 0


def test_negative_delay_recovered():
    ref = synth_speech_like(2.0, 12)
    advanced = TimeSignal(ref.samples[6 * CFG.hop_size:], FS)
    result = coarse_align(ref, advanced, CFG, beta=0.25, max_delay_frames=30)
    assert result.frame_delay == -6


def _inject_frame_delay(close, tau_frames):
    """Shift the close channel by whole frames, compensating the simulator's
    bulk rendering delay so tau_frames is the ground-truth frame offset."""
    from srpmask.sim import _BULK_DELAY_SAMPLES
    shift = tau_frames * CFG.hop_size + _BULK_DELAY_SAMPLES
    if shift >= 0:
        return TimeSignal(np.concatenate([np.zeros(shift), close.samples]),
                          close.sample_rate)
    return TimeSignal(close.samples[-shift:], close.sample_rate)


def test_noisy_delay_recovery_rate():
    # Smoke-sized version of the Monte Carlo acceptance run: white noise at
    # 5 dB, random frame delays.
    geometry = ArrayGeometry.circular(num_mics=2, radius=0.05)
    rng = np.random.default_rng(13)
    hits = 0
    for trial in range(10):
        target = synth_speech_like(1.6, 100 + trial)
        spec = SceneSpec(geometry=geometry, target_azimuth_deg=0.0,
                         snr_db=5.0, seed=trial)
        array, close, _ = render_scene(spec, target)
        tau = int(rng.integers(-30, 31))
        delayed = _inject_frame_delay(close, tau)
        result = coarse_align(array.channel(0), delayed, CFG,
                              beta=0.25, max_delay_frames=35)
        hits += (result.frame_delay == tau)
    assert hits >= 9


def test_shift_equivariance():
    ref = synth_speech_like(2.0, 14)
    base = TimeSignal(np.concatenate([np.zeros(5 * CFG.hop_size),
                                      ref.samples]), FS)
    more = TimeSignal(np.concatenate([np.zeros(8 * CFG.hop_size),
                                      ref.samples]), FS)
    tau_base = coarse_align(ref, base, CFG, 0.25, 30).frame_delay
    tau_more = coarse_align(ref, more, CFG, 0.25, 30).frame_delay
    assert tau_more - tau_base == 3


def test_gain_invariance_of_argmax():
    ref = synth_speech_like(1.5, 15)
    close = TimeSignal(np.concatenate([np.zeros(7 * CFG.hop_size),
                                       ref.samples]), FS)
    tau = coarse_align(ref, close, CFG, 0.25, 30).frame_delay
    scaled_ref = TimeSignal(0.7 * ref.samples, FS)
    scaled_close = TimeSignal(5.3 * close.samples, FS)
    assert coarse_align(scaled_ref, scaled_close, CFG, 0.25, 30).frame_delay == tau


def test_search_range_validation():
    ref = synth_speech_like(0.5, 16)
    with pytest.raises(ValueError):
        coarse_align(ref, ref, CFG, 0.25, max_delay_frames=10_000)
    with pytest.raises(ValueError):
        coarse_align(ref, TimeSignal(ref.samples, 8000.0), CFG, 0.25, 10)


def test_too_short_signals_rejected():
    short = TimeSignal(np.zeros(100), FS)
    with pytest.raises(ValueError):
        coarse_align(short, short, CFG, 0.25, 5)
