"""Mask-weighted spatial covariance, MVDR-style whitening, and SRP-PHAT scan.

Per frequency bin, speech and noise spatial covariance matrices accumulate
mask-weighted outer products of the stacked microphone spectra. Whitening
multiplies the (diagonally loaded) noise inverse into the speech matrix;
each off-diagonal entry is then projected to unit modulus and steered across
a grid of candidate directions. The direction whose summed real part is
largest wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import ArrayGeometry, DoaGrid
from .masking import RatioMask
from .stft import Spectrogram, StftConfig

# Whitened entries at or below this magnitude contribute nothing to the scan
# instead of being blown up to unit modulus.
_PHAT_FLOOR = 0.0

# Grid rows per chunk when materializing steering phases (memory control).
_SCAN_CHUNK = 64

# Single-slot steering-table cache: sweeps reuse one geometry/grid/config.
_steering_cache: dict = {}


@dataclass(frozen=True, eq=False)
class ScmPair:
    """Speech and (loaded) noise covariance stacks, shape (F, M, M) each."""

    speech: np.ndarray
    noise: np.ndarray
    loading: float

    def __post_init__(self):
        s = np.asarray(self.speech, dtype=np.complex128)
        n = np.asarray(self.noise, dtype=np.complex128)
        if s.ndim != 3 or s.shape[1] != s.shape[2] or s.shape != n.shape:
            raise ValueError("SCMs must be matching (F, M, M) stacks")
        if self.loading < 0:
            raise ValueError("loading must be nonnegative")
        object.__setattr__(self, "speech", s)
        object.__setattr__(self, "noise", n)

    @property
    def num_bins(self) -> int:
        return self.speech.shape[0]

    @property
    def num_mics(self) -> int:
        return self.speech.shape[1]


@dataclass(frozen=True, eq=False)
class DoaResult:
    """Winning direction plus the full power map over the grid."""

    best_direction: np.ndarray
    best_azimuth_deg: float
    power_map: np.ndarray
    grid: DoaGrid

    def __post_init__(self):
        if not np.all(np.isfinite(self.power_map)):
            raise ValueError("power map contains non-finite values")


def compute_scms(array_specs: Sequence[Spectrogram], mask: RatioMask,
                 loading_rel: float) -> ScmPair:
    """Mask-weighted speech/noise SCMs with relative diagonal loading.

    The noise SCM receives loading_rel * (trace/M) on its diagonal per bin
    (or loading_rel itself where the trace is zero) so whitening stays
    well-posed even for near-binary masks.
    """
    if loading_rel < 0:
        raise ValueError("loading_rel must be nonnegative")
    shapes = {spec.bins.shape for spec in array_specs}
    if len(shapes) != 1:
        raise ValueError("all channel spectrograms must share a shape")
    if mask.values.shape != next(iter(shapes)):
        raise ValueError(
            f"mask shape {mask.values.shape} does not match spectrograms "
            f"{next(iter(shapes))}")
    # Batched per-bin matmuls: with U_f of shape (M, L), the speech SCM is
    # (U_f * w_f) @ U_f^H; the noise SCM is the exact complement against the
    # unweighted total, so speech + noise == sum of outer products holds to
    # the last bit.
    stacked = np.ascontiguousarray(
        np.stack([spec.bins for spec in array_specs], axis=-1)
        .transpose(1, 2, 0))                                  # (F, M, L)
    u_herm = np.ascontiguousarray(stacked.conj().transpose(0, 2, 1))
    total = stacked @ u_herm
    speech = (stacked * mask.values.T[:, None, :]) @ u_herm
    noise = total - speech
    m = stacked.shape[1]
    scale = np.real(np.trace(noise, axis1=1, axis2=2)) / m
    load = loading_rel * np.where(scale > 0.0, scale, 1.0)
    noise[:, np.arange(m), np.arange(m)] += load[:, None]
    return ScmPair(speech, noise, loading_rel)


def whiten(scms: ScmPair) -> np.ndarray:
    """Noise-whitened speech SCMs: noise^-1 @ speech per frequency bin."""
    try:
        inv_noise = np.linalg.inv(scms.noise)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "noise SCM is singular despite loading; increase loading_rel"
        ) from exc
    whitened = inv_noise @ scms.speech
    if not np.all(np.isfinite(whitened)):
        raise ValueError(
            "whitening produced non-finite values; increase loading_rel")
    return whitened


def steering_phase(geometry: ArrayGeometry, config: StftConfig,
                   pair: tuple[int, int], direction: np.ndarray,
                   freq_bin: int, sample_rate: float) -> complex:
    """Free-field steering term for one mic pair, direction, and bin.

    exp(j * (fs/c) * (2*pi*f/N) * (d_p - d_q) . theta): the inter-mic delay
    in samples for a plane wave from theta, expressed as a unit-modulus
    phasor at bin f.
    """
    p, q = pair
    if p == q:
        raise ValueError("pair must reference two different microphones")
    direction = np.asarray(direction, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    delta = geometry.positions[p] - geometry.positions[q]
    delay_samples = (sample_rate / geometry.speed_of_sound) * float(delta @ direction)
    phase = (2.0 * np.pi * freq_bin / config.frame_size) * delay_samples
    return complex(np.exp(1j * phase))


def _steering_table(geometry: ArrayGeometry, grid: DoaGrid,
                    config: StftConfig, sample_rate: float,
                    bins: np.ndarray) -> np.ndarray:
    """Conjugate steering phases, shape (K, P, F_band); cached single-slot.

    The scan pairs each whitened entry phi_pq with the conjugate of the
    steering phasor so that a source arriving from theta (mics closer to the
    source receive the wavefront earlier) sums coherently at theta. The
    table depends only on geometry/grid/config, so sweeps reuse it.
    """
    key = (geometry.positions.tobytes(), geometry.speed_of_sound,
           grid.directions.tobytes(), config.frame_size, sample_rate,
           bins.tobytes())
    table = _steering_cache.get(key)
    if table is None:
        delays = (sample_rate / geometry.speed_of_sound) * (
            grid.directions @ geometry.pair_deltas().T)      # (K, P) samples
        omega = 2.0 * np.pi * bins / config.frame_size        # (F_band,)
        table = np.exp(-1j * delays[:, :, None] * omega[None, None, :])
        _steering_cache.clear()
        _steering_cache[key] = table
    return table


def srp_phat_scan(whitened: np.ndarray, geometry: ArrayGeometry,
                  grid: DoaGrid, config: StftConfig, sample_rate: float,
                  min_bin: int = 1, max_bin: int | None = None) -> DoaResult:
    """Steered-response power over the grid from whitened SCMs.

    Each pair's whitened entry is normalized to unit modulus (zero-magnitude
    entries contribute 0), steered, and the real parts are summed over pairs
    p < q and bins [min_bin, max_bin]. DC and Nyquist are excluded by
    default. Ties in the argmax resolve to the lowest grid index.
    """
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    n_bins = whitened.shape[0]
    if max_bin is None:
        max_bin = n_bins - 2
    if not 0 <= min_bin <= max_bin < n_bins:
        raise ValueError(f"bad bin range [{min_bin}, {max_bin}] for F={n_bins}")
    pairs = geometry.pair_indices()
    p_idx = np.array([p for p, _ in pairs])
    q_idx = np.array([q for _, q in pairs])
    band = np.arange(min_bin, max_bin + 1)
    phi = whitened[band][:, p_idx, q_idx].T                   # (P, F_band)
    mag = np.abs(phi)
    phi_hat = np.where(mag > _PHAT_FLOOR,
                       phi / np.where(mag > 0, mag, 1.0), 0.0)

    table = _steering_table(geometry, grid, config, sample_rate, band)
    power = np.empty(len(grid))
    for lo in range(0, len(grid), _SCAN_CHUNK):
        chunk = table[lo:lo + _SCAN_CHUNK]
        power[lo:lo + _SCAN_CHUNK] = np.real(
            np.tensordot(chunk, phi_hat, axes=([1, 2], [0, 1])))
    best = int(np.argmax(power))
    return DoaResult(grid.directions[best], float(grid.azimuths_deg[best]),
                     power, grid)


def power_map_to_csv(path, result: DoaResult) -> None:
    """Write (azimuth_deg, power) rows for external plotting."""
    rows = np.column_stack([result.grid.azimuths_deg, result.power_map])
    np.savetxt(path, rows, fmt="%.6f", delimiter=",",
               header="azimuth_deg,power", comments="")
