"""Antenna positions and steering vectors.

Lengths are in wavelengths throughout. Dipoles are parallel to the z axis,
ULAs lie on the y axis (azimuth pi/2) and UCAs lie in the z = 0 plane with
their first element on the positive x axis. The array centre is the origin.
"""

from dataclasses import dataclass, field
import enum
import math

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from .errors import DomainError

__all__ = [
    "ArrayKind",
    "ArrayGeometry",
    "Direction",
    "ula_positions",
    "uca_positions",
    "custom_positions",
    "chord_spacing",
    "radius_for_spacing",
    "steering_vector",
    "COINCIDENT_TOL",
]

#: Pairwise distances below this many wavelengths count as coincident.
COINCIDENT_TOL = 1e-6


class ArrayKind(enum.Enum):
    ULA = "ula"
    UCA = "uca"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Immutable set of antenna positions.

    Build instances with :func:`ula_positions`, :func:`uca_positions` or
    :func:`custom_positions` rather than directly.

    Attributes
    ----------
    positions : (N, 3) float ndarray
        Antenna positions in wavelengths (read-only).
    kind : ArrayKind
    spacing : float or None
        Element spacing (ULA) or chord spacing between neighbours (UCA).
    radius : float or None
        UCA radius.
    """

    positions: np.ndarray
    kind: ArrayKind
    spacing: float | None = None
    radius: float | None = None
    _distances: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise DomainError("positions must be an (N, 3) array with N >= 1")
        if not np.all(np.isfinite(pos)):
            raise DomainError("positions must be finite")
        n = pos.shape[0]
        if self.kind is ArrayKind.CUSTOM and n > 1:
            dist = _pairwise(pos)
            off = dist[~np.eye(n, dtype=bool)]
            if off.min() < COINCIDENT_TOL:
                raise DomainError(
                    f"coincident antennas: minimum pairwise distance {off.min():.3g} wavelengths"
                )
            dist.setflags(write=False)
            object.__setattr__(self, "_distances", dist)
        elif n > 1 and self.spacing < COINCIDENT_TOL:
            raise DomainError(f"coincident antennas: spacing {self.spacing:.3g} wavelengths")
        scale = max(1.0, float(np.abs(pos).max()))
        if np.abs(pos.mean(axis=0)).max() > 1e-9 * scale:
            raise DomainError("array centroid must lie at the origin")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def count(self):
        return self.positions.shape[0]

    @property
    def aperture(self):
        """Array size: (N-1)d for a ULA, the diameter for a UCA."""
        if self.kind is ArrayKind.ULA:
            return (self.count - 1) * self.spacing
        if self.kind is ArrayKind.UCA:
            return 2.0 * self.radius if self.count > 1 else 0.0
        return float(self.distances().max())

    def distances(self):
        """(N, N) matrix of pairwise distances in wavelengths.

        For ULAs and UCAs the matrix is filled from :meth:`generator_distances`
        so that it is exactly Toeplitz resp. circulant.
        """
        if self._distances is None:
            if self.kind is ArrayKind.ULA:
                dist = scipy.linalg.toeplitz(self.generator_distances())
            elif self.kind is ArrayKind.UCA:
                dist = scipy.linalg.circulant(self.generator_distances())
            else:
                dist = _pairwise(self.positions)
            dist.setflags(write=False)
            object.__setattr__(self, "_distances", dist)
        return self._distances

    @property
    def structure(self):
        """``"toeplitz"``, ``"circulant"`` or ``None`` for the distance matrix."""
        if self.kind is ArrayKind.ULA:
            return "toeplitz"
        if self.kind is ArrayKind.UCA:
            return "circulant"
        return None

    def generator_distances(self):
        """Distances from element 0 to element k, k = 0..N-1.

        For ULAs and UCAs the full distance matrix is determined by this
        vector (Toeplitz resp. circulant); it is computed in closed form so
        that the structure is exact.
        """
        k = np.arange(self.count)
        if self.kind is ArrayKind.ULA:
            return k * self.spacing
        if self.kind is ArrayKind.UCA:
            # fold k -> min(k, N-k) so the circulant is exactly symmetric
            k = np.minimum(k, self.count - k)
            return 2.0 * self.radius * np.sin(np.pi * k / self.count)
        raise DomainError("custom geometries have no generator")

    def is_coplanar(self, tol=1e-12):
        """True if every element lies in the z = 0 plane."""
        return bool(np.all(np.abs(self.positions[:, 2]) <= tol))


@dataclass(frozen=True)
class Direction:
    """Propagation direction; ``theta`` is the zenith angle, ``phi`` the azimuth (radians)."""

    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise DomainError("direction angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta={self.theta} outside [0, pi]")
        if not -math.pi - 1e-12 <= self.phi <= math.pi + 1e-12:
            raise DomainError(f"phi={self.phi} outside [-pi, pi]")

    @classmethod
    def from_degrees(cls, phi_deg, theta_deg=90.0):
        return cls(theta=math.radians(theta_deg), phi=math.radians(phi_deg))

    def unit_vector(self):
        st = math.sin(self.theta)
        return np.array([math.cos(self.phi) * st, math.sin(self.phi) * st, math.cos(self.theta)])


def _pairwise(pos):
    return cdist(pos, pos)


def _check_count(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"antenna count must be a positive integer, got {n!r}")
    return int(n)


def ula_positions(n, spacing):
    """ULA of ``n`` elements on the y axis, centred at the origin."""
    n = _check_count(n)
    if not spacing > 0 or not math.isfinite(spacing):
        raise DomainError(f"spacing must be positive, got {spacing!r}")
    y = (np.arange(n) - (n - 1) / 2.0) * spacing
    pos = np.zeros((n, 3))
    pos[:, 1] = y
    return ArrayGeometry(pos, ArrayKind.ULA, spacing=float(spacing))


def chord_spacing(n, radius):
    """Distance between neighbouring elements of a UCA."""
    return 2.0 * radius * math.sin(math.pi / n)


def radius_for_spacing(n, spacing):
    """UCA radius giving the requested neighbour spacing."""
    if n < 2:
        raise DomainError("a UCA spacing needs at least two elements")
    return spacing / (2.0 * math.sin(math.pi / n))


def uca_positions(n, radius):
    """UCA of ``n`` elements with radius ``radius`` in the z = 0 plane."""
    n = _check_count(n)
    if not radius > 0 or not math.isfinite(radius):
        raise DomainError(f"radius must be positive, got {radius!r}")
    t = 2.0 * np.pi * np.arange(n) / n
    pos = np.zeros((n, 3))
    if n > 1:
        pos[:, 0] = radius * np.cos(t)
        pos[:, 1] = radius * np.sin(t)
        pos[np.abs(pos) < 1e-15 * radius] = 0.0
    spacing = chord_spacing(n, radius) if n > 1 else None
    return ArrayGeometry(pos, ArrayKind.UCA, spacing=spacing, radius=float(radius))


def custom_positions(positions):
    """Arbitrary geometry; must be centred at the origin with distinct elements."""
    return ArrayGeometry(np.asarray(positions, dtype=float), ArrayKind.CUSTOM)


def steering_vector(geometry, direction):
    """a_i = exp(+j 2 pi <r_i, r(theta, phi)>).

    Every array gain in this package depends on ``a`` only through
    Hermitian forms, so flipping the sign of the exponent changes nothing.
    """
    phase = 2.0 * np.pi * (geometry.positions @ direction.unit_vector())
    return np.exp(1j * phase)
