"""Receive and transmit array gains relative to one lossless antenna.

The gains compare the best SNR achievable with the base-station array
(matched filter at the receiver for the uplink, at the transmitter for the
downlink) to the SNR of a single lossless antenna at the array centre, using
the same terminations, noise and mobile position.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, NumericalError
from .fastsolve import (
    StructuredMatrix,
    StructureKind,
    quadratic_form,
    solve,
    solve_low_rank_update,
)
from .impedance import (
    BOLTZMANN,
    ImpedanceBlocks,
    build_link_blocks,
    coupling_matrix,
    dipole_self_impedance,
    impedance_generator,
    impedance_matrix,
    mobile_position,
    radiation_resistance,
)
from .multiport import hermitian_part, noise_covariance, solve_multiport
from .scenario import LinkDirection
from .geometry import steering_vector

__all__ = [
    "Reference",
    "GainResult",
    "STRUCTURED_THRESHOLD",
    "single_antenna_reference",
    "receive_array_gain",
    "transmit_array_gain",
    "transmit_array_gain_far_field",
    "min_energy_per_bit",
    "gain_energy_product",
]

#: "auto" switches to the structured path from this many base-station antennas on.
STRUCTURED_THRESHOLD = 256

_METHODS = ("auto", "dense", "structured")


@dataclass(frozen=True)
class Reference:
    """Port quantities of the single lossless reference antenna."""

    z_in0: complex
    sigma_q0_sq: float
    z21_eff0: complex


@dataclass(frozen=True)
class GainResult:
    """Array gains of one scenario; unrequested quantities are ``None``."""

    a_rx: float | None = None
    a_tx: float | None = None
    a_tx_ff: float | None = None
    eb_min: float | None = None
    reference: Reference | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("a_rx", "a_tx", "a_tx_ff", "eb_min"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise NumericalError(f"{name} = {v!r} is not finite and positive")


def single_antenna_reference(s):
    """Reference quantities: the base station collapsed to one lossless antenna.

    The antenna sits at ``s.reference_position``; terminations, noise and the
    mobile are those of ``s``.

    Returns
    -------
    Reference
    """
    ref = np.asarray(s.reference_position, dtype=float)
    pm = mobile_position(s.mobile_distance, s.mobile_azimuth)
    if s.direction is LinkDirection.DOWNLINK:
        blocks = ImpedanceBlocks.from_positions(ref, pm)
    else:
        blocks = ImpedanceBlocks.from_positions(pm, ref)
    sol = solve_multiport(blocks, s.termination, s.noise, 0.0)
    return Reference(
        z_in0=complex(sol.Z_in[0, 0]),
        sigma_q0_sq=float(sol.Q[0, 0].real),
        z21_eff0=complex(sol.z21_eff[0, 0]),
    )


def _check_method(method):
    if method not in _METHODS:
        raise DomainError(f"method must be one of {_METHODS}, got {method!r}")


def _structure_of(geometry):
    if geometry.count < 2:
        return None
    return {"toeplitz": StructureKind.TOEPLITZ, "circulant": StructureKind.CIRCULANT}.get(
        geometry.structure
    )


def _pick_path(s, method, allowed=True):
    _check_method(method)
    kind = _structure_of(s.bs)
    if method == "dense":
        return None
    if method == "structured":
        if kind is None or not allowed:
            raise DomainError("no structured path for this geometry or noise model")
        return kind
    return kind if (allowed and s.bs.count >= STRUCTURED_THRESHOLD) else None


def _diag(info, **extra):
    d = {
        "path": info.path,
        "residual": info.residual,
        "condition": info.condition,
        "fallback": info.fallback,
    }
    if info.notes:
        d["notes"] = list(info.notes)
    d.update(extra)
    return d


def _hermitian_quad(a, v):
    """v^H a^-1 v for a dense Hermitian PD matrix ``a``."""
    a = hermitian_part(np.atleast_2d(a))
    return quadratic_form(StructuredMatrix(StructureKind.DENSE, a, hermitian=True), v, return_info=True)


def _rank2_quad(base, u, c, v):
    """v^H (base - Re(c u u^T))^-1 v for symmetric complex ``u``; Woodbury on a structured base."""
    uu = np.column_stack([u, u.conj()])
    vv = np.column_stack([u.conj(), u])
    cc = -0.5 * np.diag([c, np.conj(c)])
    x, info = solve_low_rank_update(base, uu, cc, vv, v, return_info=True)
    val = float(np.real(np.vdot(v, x)))
    if not val > 0:
        raise NumericalError("rank-2 updated matrix is not positive definite")
    return val, info


def _downlink_terms(s, method):
    """sigma_q^2 and z21,eff Re(Z_in)^-1 z21,eff^H for a downlink scenario."""
    kind = _pick_path(s, method)
    if kind is None:
        blocks = build_link_blocks(s)
        sol = solve_multiport(blocks, s.termination, s.noise, s.gamma)
        v = sol.z21_eff[0].conj()
        quad, info = _hermitian_quad(sol.re_z_in, v)
        return float(sol.Q[0, 0].real), quad, _diag(info)
    term = s.termination
    shift = s.gamma * radiation_resistance()
    z11r = StructuredMatrix(kind, impedance_generator(s.bs)).shifted(shift)
    pm = mobile_position(s.mobile_distance, s.mobile_azimuth)
    u = coupling_matrix(pm[None, :], s.bs.positions)[0]  # Z21 as a vector
    z22r = dipole_self_impedance() + shift
    x, info1 = solve(z11r.shifted(term.z_gen), u, return_info=True)
    t = u @ x  # Z21 (Z_G I + Z11,r)^-1 Z12
    c = 1.0 / (term.z_load + z22r)
    z_out = z22r - t
    z_eff = u * (1.0 - t * c)
    sigma_q_sq = float(noise_covariance([[z_out]], s.noise)[0, 0].real)
    base = z11r.real_part()
    quad, info2 = _rank2_quad(base, u, c, z_eff.conj())
    diag = _diag(info2, coupling_solve=info1.path, coupling_residual=info1.residual)
    diag["fallback"] = info1.fallback or info2.fallback
    return sigma_q_sq, quad, diag


def transmit_array_gain(s, method="auto"):
    """Downlink array gain A_Tx and minimum energy per bit.

    A_Tx = Re(Z_in,0)/sigma_q^2 * z21,eff Re(Z_in)^-1 z21,eff^H * sigma_q,0^2 / |z21,eff,0|^2

    Parameters
    ----------
    s : LinkScenario
        Downlink scenario.
    method : {"auto", "dense", "structured"}
        ``"structured"`` solves the Toeplitz/circulant base-station block by
        fast methods and treats the coupling to the mobile as a rank-2 update;
        ``"auto"`` uses it from :data:`STRUCTURED_THRESHOLD` antennas on.

    Returns
    -------
    GainResult
        With ``a_tx``, ``eb_min`` and ``reference`` set.
    """
    if s.direction is not LinkDirection.DOWNLINK:
        raise DomainError("transmit_array_gain needs a downlink scenario")
    ref = single_antenna_reference(s)
    sigma_q_sq, quad, diag = _downlink_terms(s, method)
    a_tx = ref.z_in0.real / sigma_q_sq * quad * ref.sigma_q0_sq / abs(ref.z21_eff0) ** 2
    eb = sigma_q_sq * math.log(2.0) / (s.noise.bandwidth * quad)
    return GainResult(a_tx=a_tx, eb_min=eb, reference=ref, diagnostics=diag)


def min_energy_per_bit(s, method="auto"):
    """E_b,min = sigma_q^2 ln 2 / (df z21,eff Re(Z_in)^-1 z21,eff^H), in joules."""
    return transmit_array_gain(s, method=method).eb_min


def gain_energy_product(s):
    """The constant A_Tx * E_b,min = Re(Z_in,0) sigma_q,0^2 ln 2 / (df |z21,eff,0|^2).

    It depends on the reference antenna only, so E_b,min is inversely
    proportional to A_Tx across array sizes.
    """
    ref = single_antenna_reference(s.downlink())
    return ref.z_in0.real * ref.sigma_q0_sq * math.log(2.0) / (
        s.noise.bandwidth * abs(ref.z21_eff0) ** 2
    )


def receive_array_gain(s, method="auto"):
    """Uplink array gain A_Rx.

    A_Rx = Re(Z_in,0)/Re(Z_in) * z21,eff^H Q^-1 z21,eff * sigma_q,0^2 / |z21,eff,0|^2

    The structured path is available when the receive chains carry no LNA
    current noise (``sigma_i = 0``); then Q is a Toeplitz/circulant matrix
    plus a rank-2 update.

    Parameters
    ----------
    s : LinkScenario
        Uplink scenario.
    method : {"auto", "dense", "structured"}

    Returns
    -------
    GainResult
        With ``a_rx`` and ``reference`` set.
    """
    if s.direction is not LinkDirection.UPLINK:
        raise DomainError("receive_array_gain needs an uplink scenario")
    ref = single_antenna_reference(s)
    kind = _pick_path(s, method, allowed=s.noise.sigma_i == 0)
    if kind is None:
        blocks = build_link_blocks(s)
        sol = solve_multiport(blocks, s.termination, s.noise, s.gamma)
        re_zin = float(sol.Z_in[0, 0].real)
        quad, info = _hermitian_quad(sol.Q, sol.z21_eff[:, 0])
        diag = _diag(info)
    else:
        term = s.termination
        noise = s.noise
        shift = s.gamma * radiation_resistance()
        z22r = StructuredMatrix(kind, impedance_generator(s.bs)).shifted(shift)
        pm = mobile_position(s.mobile_distance, s.mobile_azimuth)
        u = coupling_matrix(pm[None, :], s.bs.positions)[0]
        z11r = dipole_self_impedance() + shift
        y, info1 = solve(z22r.shifted(term.z_load), u, return_info=True)
        t = u @ y  # Z12 (Z_L I + Z22,r)^-1 Z21
        re_zin = float((z11r - t).real)
        c = 1.0 / (term.z_gen + z11r)
        z_eff = u * (1.0 - c * t)
        w = 4.0 * BOLTZMANN * noise.t_antenna * noise.bandwidth
        base = StructuredMatrix(kind, w * z22r.generator.real).shifted(noise.sigma_u ** 2)
        quad, info2 = _rank2_quad(base, u, w * c, z_eff)
        diag = _diag(info2, coupling_solve=info1.path, coupling_residual=info1.residual)
        diag["fallback"] = info1.fallback or info2.fallback
    if not re_zin > 0:
        raise NumericalError(f"Re(Z_in) = {re_zin:.6g} is not positive")
    a_rx = ref.z_in0.real / re_zin * quad * ref.sigma_q0_sq / abs(ref.z21_eff0) ** 2
    return GainResult(a_rx=a_rx, reference=ref, diagnostics=diag)


def transmit_array_gain_far_field(geometry, direction, gamma, method="auto", return_result=False):
    """Far-field transmit array gain R_r a^H Re(Z11,r)^-1 a.

    Parameters
    ----------
    geometry : ArrayGeometry
    direction : Direction
    gamma : float
        Loss factor, ``>= 0``.
    method : {"auto", "dense", "structured"}
        ``"auto"`` uses the Toeplitz/circulant path whenever the geometry has one.
    return_result : bool
        Return a :class:`GainResult` with diagnostics instead of a float.
    """
    _check_method(method)
    if not (gamma >= 0 and math.isfinite(gamma)):
        raise DomainError(f"gamma must be >= 0, got {gamma!r}")
    rr = radiation_resistance()
    a = steering_vector(geometry, direction)
    kind = _structure_of(geometry)
    if method == "structured" and kind is None:
        raise DomainError("no structured path for this geometry")
    if method != "dense" and kind is not None:
        mat = StructuredMatrix(kind, impedance_generator(geometry).real).shifted(gamma * rr)
    else:
        mat = StructuredMatrix.dense(impedance_matrix(geometry).real + gamma * rr * np.eye(geometry.count))
    quad, info = quadratic_form(mat, a, return_info=True)
    val = rr * quad
    if not return_result:
        return val
    return GainResult(a_tx_ff=val, diagnostics=_diag(info))
