"""Multiport circuit model of a coupled transmitter/receiver antenna system.

Given the partitioned impedance matrix of the antennas, the generator and
load terminations, the antenna loss factor and the receiver noise model,
this module computes the impedances seen at the ports, the noise
covariance at the receiver, the effective mutual impedance and the
equivalent information-theoretic channel.

Conventions: ``Re(A)`` of a matrix is its Hermitian part (A + A^H)/2. For
the complex-symmetric impedance matrices of a reciprocal network this is the
elementwise real part.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalError
from .impedance import BOLTZMANN, dipole_self_impedance, with_loss

__all__ = [
    "TerminationModel",
    "NoiseModel",
    "ANTENNA_NOISE_ONLY",
    "ILLUSTRATIVE_LNA_NOISE",
    "MultiportSolution",
    "hermitian_part",
    "hermitian_sqrt",
    "input_impedance",
    "output_impedance",
    "noise_covariance",
    "effective_mutual_impedance",
    "solve_multiport",
    "power_coupling",
    "voltage_transfer",
    "noise_coupling",
    "b_sqrt",
    "r_eta_sqrt",
    "channel_matrix",
    "physical_channel_matrix",
]

#: Measured LNA input impedance used for the numerical results (ohm).
DEFAULT_Z_LOAD = 186 - 31.6j


@dataclass(frozen=True)
class TerminationModel:
    """Load (LNA input) impedance; the generator is power matched, Z_G = Z_A*."""

    z_load: complex = DEFAULT_Z_LOAD
    z_gen: complex = field(init=False)

    def __post_init__(self):
        z_load = complex(self.z_load)
        if not z_load.real > 0:
            raise DomainError(f"Re(Z_L) must be positive, got {z_load}")
        object.__setattr__(self, "z_load", z_load)
        object.__setattr__(self, "z_gen", dipole_self_impedance().conjugate())

    @property
    def r_load(self):
        return self.z_load.real

    @property
    def r_gen(self):
        return self.z_gen.real


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise: LNA voltage/current sources plus thermal antenna noise.

    Attributes
    ----------
    sigma_u : float
        RMS noise voltage of the LNA equivalent source (V).
    sigma_i : float
        RMS noise current (A).
    rho : complex
        Correlation coefficient between the two sources, ``|rho| <= 1``.
    t_antenna : float
        Antenna noise temperature (K).
    bandwidth : float
        Noise bandwidth (Hz).
    """

    sigma_u: float = 0.0
    sigma_i: float = 0.0
    rho: complex = 0j
    t_antenna: float = 290.0
    bandwidth: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rho", complex(self.rho))
        if not (self.sigma_u >= 0 and self.sigma_i >= 0):
            raise DomainError("sigma_u and sigma_i must be non-negative")
        if not abs(self.rho) <= 1:
            raise DomainError(f"|rho| must not exceed 1, got {abs(self.rho):.6g}")
        if not (self.t_antenna > 0 and self.bandwidth > 0):
            raise DomainError("t_antenna and bandwidth must be positive")
        for name in ("sigma_u", "sigma_i", "t_antenna", "bandwidth"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


ANTENNA_NOISE_ONLY = NoiseModel()

_KT0 = 4.0 * BOLTZMANN * 290.0
#: Illustrative LNA noise for 1 Hz bandwidth: 50 ohm noise resistance for the
#: voltage source and 10 ohm for the current source, uncorrelated.
#: Not taken from any measurement.
ILLUSTRATIVE_LNA_NOISE = NoiseModel(
    sigma_u=math.sqrt(_KT0 * 50.0),
    sigma_i=math.sqrt(_KT0 / 10.0),
    rho=0j,
)


def hermitian_part(a):
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def _solve(a, b, name):
    """Dense LU solve; singular or badly conditioned systems raise NumericalError."""
    a = np.asarray(a)
    if a.shape == (1, 1):
        if a[0, 0] == 0:
            raise NumericalError(f"{name} is singular", matrix=name, condition=math.inf)
        return np.asarray(b) / a[0, 0]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            return scipy.linalg.solve(a, b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        cond = float(np.linalg.cond(a))
        raise NumericalError(
            f"{name} is singular to working precision (condition number {cond:.3g})",
            matrix=name,
            condition=cond,
        ) from None


def _check_psd(a, name, tol=1e-12):
    """Raise NumericalError unless Hermitian ``a`` is PSD within ``tol * trace/M``."""
    w = np.linalg.eigvalsh(a)
    bound = -tol * abs(np.trace(a).real) / a.shape[0]
    if w[0] < bound:
        raise NumericalError(
            f"{name} is not positive semidefinite (smallest eigenvalue {w[0]:.6g})",
            matrix=name,
            min_eigenvalue=float(w[0]),
        )
    return w


def hermitian_sqrt(a, name="matrix", inverse=False):
    """Principal square root (or inverse square root) of a Hermitian PSD matrix.

    Eigenvalues down to ``-1e-12 * lambda_max`` are clamped to zero; anything
    more negative is an error. The inverse root additionally requires a
    strictly positive spectrum.
    """
    a = hermitian_part(a)
    w, v = np.linalg.eigh(a)
    top = max(abs(w[-1]), abs(w[0]))
    if w[0] < -1e-12 * top:
        raise NumericalError(
            f"{name} is not positive semidefinite (smallest eigenvalue {w[0]:.6g})",
            matrix=name,
            min_eigenvalue=float(w[0]),
        )
    w = np.clip(w, 0.0, None)
    if inverse:
        if w[0] <= 0:
            raise NumericalError(
                f"{name} is singular; no inverse square root (smallest eigenvalue {w[0]:.3g})",
                matrix=name,
                min_eigenvalue=float(w[0]),
            )
        s = 1.0 / np.sqrt(w)
    else:
        s = np.sqrt(w)
    return (v * s) @ v.conj().T


def input_impedance(blocks, z_load, gamma):
    """Z_in = Z11,r - Z12 (Z_L I + Z22,r)^-1 Z21 (N x N)."""
    z11r, z22r = with_loss(blocks, gamma)
    inner = z_load * np.eye(blocks.m) + z22r
    return z11r - blocks.Z12 @ _solve(inner, blocks.Z21, "Z_L I + Z22,r")


def output_impedance(blocks, z_gen, gamma):
    """Z_out = Z22,r - Z21 (Z_G I + Z11,r)^-1 Z12 (M x M)."""
    z11r, z22r = with_loss(blocks, gamma)
    inner = z_gen * np.eye(blocks.n) + z11r
    return z22r - blocks.Z21 @ _solve(inner, blocks.Z12, "Z_G I + Z11,r")


def noise_covariance(z_out, noise):
    """Receiver noise covariance Q in V^2.

    Q = s_u^2 I + s_i^2 Z_out Z_out^H - 2 s_u s_i Re(rho* Z_out) + 4 k T_A df Re(Z_out)
    """
    z_out = np.atleast_2d(np.asarray(z_out, dtype=complex))
    m = z_out.shape[0]
    q = 4.0 * BOLTZMANN * noise.t_antenna * noise.bandwidth * hermitian_part(z_out)
    if noise.sigma_u:
        q = q + noise.sigma_u ** 2 * np.eye(m)
    if noise.sigma_i:
        q = q + noise.sigma_i ** 2 * (z_out @ z_out.conj().T)
    if noise.sigma_u and noise.sigma_i:
        q = q - 2.0 * noise.sigma_u * noise.sigma_i * hermitian_part(noise.rho.conjugate() * z_out)
    q = hermitian_part(q)
    _check_psd(q, "Q")
    return q


def effective_mutual_impedance(blocks, z_gen, z_load, gamma):
    """Z21,eff = Z21 - Z21 (Z_G I + Z11,r)^-1 Z12 (Z_L I + Z22,r)^-1 Z21 (M x N)."""
    z11r, z22r = with_loss(blocks, gamma)
    x = _solve(z_gen * np.eye(blocks.n) + z11r, blocks.Z12, "Z_G I + Z11,r")
    y = _solve(z_load * np.eye(blocks.m) + z22r, blocks.Z21, "Z_L I + Z22,r")
    return blocks.Z21 - blocks.Z21 @ x @ y


@dataclass(frozen=True, eq=False)
class MultiportSolution:
    """Port quantities of one link; see :func:`solve_multiport`."""

    Z_in: np.ndarray
    Z_out: np.ndarray
    Q: np.ndarray
    z21_eff: np.ndarray
    blocks: object
    termination: TerminationModel
    noise: NoiseModel
    gamma: float

    @property
    def re_z_in(self):
        return hermitian_part(self.Z_in)


def solve_multiport(blocks, termination, noise, gamma):
    """Evaluate Z_in, Z_out, Q and Z21,eff with two linear solves.

    The solves against (Z_G I + Z11,r) and (Z_L I + Z22,r) are shared by all
    four quantities.
    """
    z11r, z22r = with_loss(blocks, gamma)
    x = _solve(termination.z_gen * np.eye(blocks.n) + z11r, blocks.Z12, "Z_G I + Z11,r")  # N x M
    y = _solve(termination.z_load * np.eye(blocks.m) + z22r, blocks.Z21, "Z_L I + Z22,r")  # M x N
    z21x = blocks.Z21 @ x  # M x M
    z_in = z11r - blocks.Z12 @ y
    z_out = z22r - z21x
    z_eff = blocks.Z21 - z21x @ y
    q = noise_covariance(z_out, noise)
    return MultiportSolution(
        Z_in=z_in,
        Z_out=z_out,
        Q=q,
        z21_eff=z_eff,
        blocks=blocks,
        termination=termination,
        noise=noise,
        gamma=gamma,
    )


def power_coupling(z_in, z_gen):
    """B = R_G (Z_in + Z_G I)^-H Re(Z_in) (Z_in + Z_G I)^-1."""
    z_in = np.atleast_2d(z_in)
    n = z_in.shape[0]
    w = _solve(z_in + z_gen * np.eye(n), np.eye(n), "Z_in + Z_G I")
    b = z_gen.real * (w.conj().T @ hermitian_part(z_in) @ w)
    return hermitian_part(b)


def voltage_transfer(blocks, z_in, z_load, z_gen, gamma=0.0):
    """D = Z_L (Z22,r + Z_L I)^-1 Z21 (Z_in + Z_G I)^-1.

    The receive-side impedance includes the series loss so that D matches the
    Z_out and Z21,eff used elsewhere; for ``gamma = 0`` this is Z22.
    """
    _, z22r = with_loss(blocks, gamma)
    left = _solve(z22r + z_load * np.eye(blocks.m), blocks.Z21, "Z22,r + Z_L I")
    n = blocks.n
    right_t = _solve((z_in + z_gen * np.eye(n)).T, left.T, "Z_in + Z_G I")
    return z_load * right_t.T


def noise_coupling(solution):
    """R_eta = |Z_L|^2 / R_L (Z_out + Z_L I)^-1 Q (Z_out + Z_L I)^-H."""
    zl = solution.termination.z_load
    m = solution.Z_out.shape[0]
    a = solution.Z_out + zl * np.eye(m)
    g = _solve(a, solution.Q, "Z_out + Z_L I")  # A^-1 Q
    r = _solve(a, g.conj().T, "Z_out + Z_L I").conj().T  # A^-1 Q A^-H
    return hermitian_part((abs(zl) ** 2 / zl.real) * r)


def b_sqrt(solution):
    """B^{1/2} = sqrt(R_G) (Z_in + Z_G I)^-H Re(Z_in)^{1/2}."""
    zg = solution.termination.z_gen
    n = solution.Z_in.shape[0]
    root = hermitian_sqrt(solution.re_z_in, "Re(Z_in)")
    a_h = (solution.Z_in + zg * np.eye(n)).conj().T
    return math.sqrt(zg.real) * _solve(a_h, root, "(Z_in + Z_G I)^H")


def r_eta_sqrt(solution):
    """R_eta^{1/2} = Z_L / sqrt(R_L) (Z_out + Z_L I)^-1 Q^{1/2}."""
    zl = solution.termination.z_load
    m = solution.Z_out.shape[0]
    root = hermitian_sqrt(solution.Q, "Q")
    return (zl / math.sqrt(zl.real)) * _solve(solution.Z_out + zl * np.eye(m), root, "Z_out + Z_L I")


def channel_matrix(solution, sigma_theta=1.0):
    """H = sigma_theta Q^{-1/2} Z21,eff Re(Z_in)^{-1/2} (M x N, dimensionless)."""
    q_isqrt = hermitian_sqrt(solution.Q, "Q", inverse=True)
    r_isqrt = hermitian_sqrt(solution.re_z_in, "Re(Z_in)", inverse=True)
    return sigma_theta * (q_isqrt @ solution.z21_eff @ r_isqrt)


def physical_channel_matrix(solution, sigma_theta=1.0):
    """H from the physical model: sigma sqrt(R_G/R_L) R_eta^{-1/2} D B^{-H/2}.

    Independent of :func:`channel_matrix`; the two agree when the square-root
    factors are chosen as in :func:`b_sqrt` and :func:`r_eta_sqrt`.
    """
    term = solution.termination
    d = voltage_transfer(solution.blocks, solution.Z_in, term.z_load, term.z_gen, solution.gamma)
    bs = b_sqrt(solution)
    rs = r_eta_sqrt(solution)
    left = _solve(rs, d, "R_eta^{1/2}")  # R_eta^{-1/2} D
    # left @ (B^{1/2})^{-H}  ==  solve(B^{1/2}, left^H)^H
    out = _solve(bs, left.conj().T, "B^{1/2}").conj().T
    return sigma_theta * math.sqrt(term.r_gen / term.r_load) * out
