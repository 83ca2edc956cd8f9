"""Self and mutual impedances of thin half-wave dipoles.

All dipoles are parallel to the z axis with their centres in the z = 0
plane, so every pair is in the side-by-side configuration. The values come
from the induced-EMF method with a sinusoidal current distribution; the
current normalisation is the usual one referred to the feed point.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
import scipy.constants
import scipy.linalg

from .errors import DomainError
from .geometry import COINCIDENT_TOL, ArrayKind
from .specfun import EULER_GAMMA, sici, sine_integral, cosine_integral

__all__ = [
    "ETA0",
    "BOLTZMANN",
    "DIPOLE_LENGTH",
    "dipole_self_impedance",
    "radiation_resistance",
    "mutual_impedance",
    "impedance_generator",
    "impedance_matrix",
    "coupling_matrix",
    "ImpedanceBlocks",
    "build_link_blocks",
    "with_loss",
]

#: Free-space wave impedance mu_0 * c in ohm.
ETA0 = scipy.constants.mu_0 * scipy.constants.c
BOLTZMANN = scipy.constants.k
#: Dipole length in wavelengths.
DIPOLE_LENGTH = 0.5

_K = 2.0 * math.pi  # wavenumber for lengths measured in wavelengths
_SCALE = ETA0 / (4.0 * math.pi)


@lru_cache(maxsize=None)
def dipole_self_impedance():
    """Self impedance Z_A of a thin half-wave dipole (about 73.08 + 42.52j ohm)."""
    kl = _K * DIPOLE_LENGTH * 2.0  # 2 pi
    r = _SCALE * (EULER_GAMMA + math.log(kl) - cosine_integral(kl))
    x = _SCALE * sine_integral(kl)
    return complex(r, x)


def radiation_resistance():
    """R_r = Re(Z_A)."""
    return dipole_self_impedance().real


def mutual_impedance(d):
    """Mutual impedance of two side-by-side half-wave dipoles ``d`` wavelengths apart.

    Parameters
    ----------
    d : float or array_like
        Separation(s) in wavelengths, all ``> 0``.

    Returns
    -------
    complex or complex ndarray
    """
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise DomainError("mutual impedance needs finite separations d > 0")
    ell = DIPOLE_LENGTH
    root = np.sqrt(d * d + ell * ell)
    u0 = _K * d
    u1 = _K * (root + ell)
    # root - ell without cancellation
    u2 = _K * (d * d) / (root + ell)
    s0, c0 = sici(u0)
    s1, c1 = sici(u1)
    s2, c2 = sici(u2)
    z = _SCALE * ((2.0 * c0 - c1 - c2) - 1j * (2.0 * np.asarray(s0) - s1 - s2))
    return complex(z) if d.ndim == 0 else z


def _impedance_of_distances(dist):
    """Fill a distance array with impedances, Z_A wherever the distance is 0."""
    dist = np.asarray(dist, dtype=float)
    out = np.empty(dist.shape, dtype=complex)
    zero = dist == 0.0
    if np.any(dist[~zero] < COINCIDENT_TOL):
        raise DomainError("coincident antennas (distance below 1e-6 wavelengths)")
    out[zero] = dipole_self_impedance()
    if (~zero).any():
        out[~zero] = mutual_impedance(dist[~zero])
    return out


def _require_coplanar(geometry):
    if not geometry.is_coplanar():
        raise DomainError("impedance model covers side-by-side dipoles only (all z = 0)")


def impedance_generator(geometry):
    """First column of the Toeplitz (ULA) or circulant (UCA) impedance matrix."""
    return _impedance_of_distances(geometry.generator_distances())


def impedance_matrix(geometry):
    """N x N impedance matrix of an array, Z_A on the diagonal.

    ULA matrices are exactly Toeplitz and UCA matrices exactly circulant;
    all are exactly symmetric.
    """
    _require_coplanar(geometry)
    if geometry.count == 1:
        return np.array([[dipole_self_impedance()]])
    if geometry.kind is ArrayKind.ULA:
        c = impedance_generator(geometry)
        # pass the row explicitly: the default row is conj(c), which is Hermitian, not symmetric
        return scipy.linalg.toeplitz(c, c)
    if geometry.kind is ArrayKind.UCA:
        return scipy.linalg.circulant(impedance_generator(geometry))
    dist = geometry.distances()
    iu = np.triu_indices(geometry.count, k=1)
    z = np.full(dist.shape, dipole_self_impedance(), dtype=complex)
    z[iu] = mutual_impedance(dist[iu])
    z.T[iu] = z[iu]
    return z


def coupling_matrix(rx_positions, tx_positions):
    """M x N mutual impedances between two disjoint sets of coplanar dipoles."""
    rx = np.atleast_2d(np.asarray(rx_positions, dtype=float))
    tx = np.atleast_2d(np.asarray(tx_positions, dtype=float))
    if np.any(np.abs(rx[:, 2]) > 1e-12) or np.any(np.abs(tx[:, 2]) > 1e-12):
        raise DomainError("impedance model covers side-by-side dipoles only (all z = 0)")
    diff = rx[:, None, :2] - tx[None, :, :2]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    if dist.min() < COINCIDENT_TOL:
        raise DomainError(
            f"coincident antennas: transmitter/receiver distance {dist.min():.3g} wavelengths"
        )
    return np.asarray(mutual_impedance(dist)).reshape(dist.shape)


@dataclass(frozen=True, eq=False)
class ImpedanceBlocks:
    """Partitioned impedance matrix of a transmitter (side 1) and receiver (side 2).

    ``Z11`` is N x N, ``Z22`` is M x M, ``Z21`` is M x N and ``Z12 = Z21.T``.
    """

    Z11: np.ndarray
    Z12: np.ndarray
    Z21: np.ndarray
    Z22: np.ndarray

    def __post_init__(self):
        n = self.Z11.shape[0]
        m = self.Z22.shape[0]
        if self.Z11.shape != (n, n) or self.Z22.shape != (m, m):
            raise DomainError("Z11 and Z22 must be square")
        if self.Z21.shape != (m, n) or self.Z12.shape != (n, m):
            raise DomainError("inconsistent block shapes")

    @property
    def n(self):
        return self.Z11.shape[0]

    @property
    def m(self):
        return self.Z22.shape[0]

    def full(self):
        """The assembled (N+M) x (N+M) matrix."""
        return np.block([[self.Z11, self.Z12], [self.Z21, self.Z22]])

    def reversed(self):
        """Swap the roles of transmitter and receiver."""
        return ImpedanceBlocks(Z11=self.Z22, Z12=self.Z21, Z21=self.Z12, Z22=self.Z11)

    @classmethod
    def from_positions(cls, tx_positions, rx_positions, tx_matrix=None, rx_matrix=None):
        """Blocks for arbitrary transmitter and receiver position sets."""
        tx = np.atleast_2d(np.asarray(tx_positions, dtype=float))
        rx = np.atleast_2d(np.asarray(rx_positions, dtype=float))
        z11 = tx_matrix if tx_matrix is not None else _self_block(tx)
        z22 = rx_matrix if rx_matrix is not None else _self_block(rx)
        z21 = coupling_matrix(rx, tx)
        return cls(Z11=z11, Z12=z21.T.copy(), Z21=z21, Z22=z22)


def _self_block(pos):
    from .geometry import custom_positions

    if pos.shape[0] == 1:
        return np.array([[dipole_self_impedance()]])
    centre = pos.mean(axis=0)
    g = custom_positions(pos - centre)
    return impedance_matrix(g)


def mobile_position(distance, azimuth):
    """Position of the single-antenna mobile in the z = 0 plane."""
    return np.array([distance * math.cos(azimuth), distance * math.sin(azimuth), 0.0])


def build_link_blocks(scenario, bs_matrix=None):
    """Impedance blocks for a base-station array and a single-antenna mobile.

    In the downlink the base station is side 1 (N = N_BS, M = 1); in the
    uplink it is side 2 (N = 1, M = N_BS).

    Parameters
    ----------
    scenario : LinkScenario
    bs_matrix : ndarray, optional
        Precomputed ``impedance_matrix(scenario.bs)``; saves the assembly
        when the same array is evaluated for several links.
    """
    from .scenario import LinkDirection

    bs = scenario.bs
    _require_coplanar(bs)
    if not scenario.mobile_distance > 0:
        raise DomainError("mobile distance d_bm must be positive")
    pm = mobile_position(scenario.mobile_distance, scenario.mobile_azimuth)
    z_bs = impedance_matrix(bs) if bs_matrix is None else bs_matrix
    z_mb = np.array([[dipole_self_impedance()]])
    coupling = coupling_matrix(pm[None, :], bs.positions)  # 1 x N_BS
    if scenario.direction is LinkDirection.DOWNLINK:
        return ImpedanceBlocks(Z11=z_bs, Z12=coupling.T.copy(), Z21=coupling, Z22=z_mb)
    col = coupling.T.copy()
    return ImpedanceBlocks(Z11=z_mb, Z12=coupling, Z21=col, Z22=z_bs)


def with_loss(blocks, gamma):
    """(Z11 + gamma R_r I, Z22 + gamma R_r I): series dissipation in every antenna."""
    if not gamma >= 0:
        raise DomainError(f"loss factor gamma must be >= 0, got {gamma!r}")
    shift = gamma * radiation_resistance()
    z11r = blocks.Z11 + shift * np.eye(blocks.n)
    z22r = blocks.Z22 + shift * np.eye(blocks.m)
    return z11r, z22r
