"""Microphone-array geometry and direction-of-arrival search grids.

Directions are unit vectors pointing from the array center toward the
source. Azimuth follows the math convention: 0 deg = +x, 90 deg = +y,
counterclockwise in the horizontal plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_SOUND = 343.0

_UNIT_TOL = 1e-9


def azimuth_to_direction(azimuth_deg, elevation_deg=0.0) -> np.ndarray:
    """Unit vector(s) for azimuth/elevation in degrees."""
    az = np.deg2rad(np.asarray(azimuth_deg, dtype=np.float64))
    el = np.deg2rad(np.asarray(elevation_deg, dtype=np.float64))
    return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az),
                     np.broadcast_to(np.sin(el), az.shape)], axis=-1)


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Microphone positions (M, 3) in meters and the speed of sound in m/s."""

    positions: np.ndarray
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 2:
            raise ValueError("positions must be an (M, 3) array with M >= 2")
        if np.unique(pos, axis=0).shape[0] != pos.shape[0]:
            raise ValueError("microphone positions must be distinct")
        if not self.speed_of_sound > 0:
            raise ValueError("speed_of_sound must be positive")
        object.__setattr__(self, "positions", pos)

    @property
    def num_mics(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def circular(cls, num_mics: int = 16, radius: float = 0.516,
                 speed_of_sound: float = SPEED_OF_SOUND) -> "ArrayGeometry":
        """Evenly spaced ring in the horizontal plane, mic 0 at +x."""
        angles = 2.0 * np.pi * np.arange(num_mics) / num_mics
        pos = radius * np.stack([np.cos(angles), np.sin(angles),
                                 np.zeros(num_mics)], axis=1)
        return cls(pos, speed_of_sound)

    def pair_indices(self) -> list[tuple[int, int]]:
        """All microphone pairs (p, q) with p < q."""
        m = self.num_mics
        return [(p, q) for p in range(m) for q in range(p + 1, m)]

    def pair_deltas(self) -> np.ndarray:
        """Position differences d_p - d_q for every pair, shape (P, 3)."""
        pairs = self.pair_indices()
        return np.stack([self.positions[p] - self.positions[q]
                         for p, q in pairs])

    def rotated(self, rotation: np.ndarray) -> "ArrayGeometry":
        """Geometry with every position rotated by a 3x3 matrix."""
        return ArrayGeometry(self.positions @ np.asarray(rotation).T,
                             self.speed_of_sound)


@dataclass(frozen=True, eq=False)
class DoaGrid:
    """Candidate directions (unit vectors) with their angle labels."""

    directions: np.ndarray
    azimuths_deg: np.ndarray
    elevations_deg: np.ndarray = field(default=None)

    def __post_init__(self):
        dirs = np.asarray(self.directions, dtype=np.float64)
        az = np.asarray(self.azimuths_deg, dtype=np.float64)
        if dirs.ndim != 2 or dirs.shape[1] != 3 or dirs.shape[0] == 0:
            raise ValueError("directions must be a nonempty (K, 3) array")
        if az.shape != (dirs.shape[0],):
            raise ValueError("azimuths_deg must have one label per direction")
        norms = np.linalg.norm(dirs, axis=1)
        if np.max(np.abs(norms - 1.0)) > _UNIT_TOL:
            raise ValueError("directions must be unit vectors")
        if np.unique(dirs, axis=0).shape[0] != dirs.shape[0]:
            raise ValueError("directions must be distinct")
        el = self.elevations_deg
        el = np.zeros(dirs.shape[0]) if el is None else np.asarray(el, float)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "azimuths_deg", az)
        object.__setattr__(self, "elevations_deg", el)

    def __len__(self) -> int:
        return self.directions.shape[0]

    @classmethod
    def azimuth_ring(cls, step_deg: float = 1.0,
                     elevation_deg: float = 0.0) -> "DoaGrid":
        """Full-circle azimuth scan at fixed elevation."""
        if not 0 < step_deg <= 360:
            raise ValueError("step_deg must lie in (0, 360]")
        az = np.arange(0.0, 360.0, step_deg)
        dirs = azimuth_to_direction(az, elevation_deg)
        # Renormalize so accumulated rounding cannot trip the unit check.
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return cls(dirs, az, np.full(az.shape, elevation_deg))
