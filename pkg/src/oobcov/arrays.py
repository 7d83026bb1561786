"""Uniform linear array geometry and response vectors."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UlaGeometry:
    """Uniform linear array.

    Attributes
    ----------
    num_antennas : int
        Number of elements N.
    spacing : float
        Inter-element spacing normalized by the carrier wavelength.
    """

    num_antennas: int
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 1:
            raise ValueError("num_antennas must be a positive integer")
        if self.spacing <= 0:
            raise ValueError("spacing must be > 0")
        object.__setattr__(self, "num_antennas", int(self.num_antennas))


def array_response(geom, angle):
    """Unit-norm ULA response vector for a plane wave from `angle` (radians).

    Entry n is (1/sqrt(N)) * exp(j * n * 2*pi*spacing*sin(angle)).
    """
    n = np.arange(geom.num_antennas)
    phase = 2.0 * np.pi * geom.spacing * np.sin(angle)
    return np.exp(1j * phase * n) / np.sqrt(geom.num_antennas)


def steering_matrix(geom, angles):
    """Stack response vectors for several angles into an N x len(angles) matrix."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    n = np.arange(geom.num_antennas)[:, None]
    phases = 2.0 * np.pi * geom.spacing * np.sin(angles)[None, :]
    return np.exp(1j * n * phases) / np.sqrt(geom.num_antennas)
