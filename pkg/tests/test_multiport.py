import numpy as np
import pytest

from coupledarray.errors import DomainError, NumericalError
from coupledarray.impedance import BOLTZMANN, ImpedanceBlocks, dipole_self_impedance, radiation_resistance
from coupledarray.multiport import (
    ANTENNA_NOISE_ONLY,
    DEFAULT_Z_LOAD,
    ILLUSTRATIVE_LNA_NOISE,
    NoiseModel,
    TerminationModel,
    b_sqrt,
    channel_matrix,
    effective_mutual_impedance,
    hermitian_sqrt,
    input_impedance,
    noise_coupling,
    noise_covariance,
    output_impedance,
    physical_channel_matrix,
    power_coupling,
    r_eta_sqrt,
    solve_multiport,
)

from helpers import random_link
from oracles import max_snr_generalized


def test_termination_defaults():
    t = TerminationModel()
    assert t.z_load == DEFAULT_Z_LOAD
    assert t.z_gen == dipole_self_impedance().conjugate()
    with pytest.raises(DomainError):
        TerminationModel(z_load=-1 + 0j)


def test_noise_model_validation():
    with pytest.raises(DomainError):
        NoiseModel(sigma_u=-1.0)
    with pytest.raises(DomainError):
        NoiseModel(rho=2.0)
    with pytest.raises(DomainError):
        NoiseModel(t_antenna=0.0)
    assert ILLUSTRATIVE_LNA_NOISE.sigma_i > 0


def test_uncoupled_limit():
    # no coupling between the ends: Z_in = Z11,r and Z_out = Z22,r
    z = dipole_self_impedance()
    b = ImpedanceBlocks(np.array([[z]]), np.zeros((1, 1)), np.zeros((1, 1)), np.array([[z]]))
    zin = input_impedance(b, DEFAULT_Z_LOAD, 0.01)
    zout = output_impedance(b, z.conjugate(), 0.01)
    assert zin[0, 0] == pytest.approx(z + 0.01 * radiation_resistance())
    assert zout[0, 0] == zin[0, 0]
    q = noise_covariance(zout, ANTENNA_NOISE_ONLY)
    assert q[0, 0] == pytest.approx(4 * BOLTZMANN * 290 * zout[0, 0].real)


def test_scalar_link_by_hand():
    z, z21 = dipole_self_impedance(), 0.37 - 1.2j
    b = ImpedanceBlocks.from_positions([[0, 0, 0]], [[5, 0, 0]])
    b = ImpedanceBlocks(b.Z11, np.array([[z21]]), np.array([[z21]]), b.Z22)
    zg, zl = z.conjugate(), DEFAULT_Z_LOAD
    sol = solve_multiport(b, TerminationModel(), ANTENNA_NOISE_ONLY, 0.0)
    assert sol.Z_in[0, 0] == pytest.approx(z - z21 ** 2 / (zl + z))
    assert sol.Z_out[0, 0] == pytest.approx(z - z21 ** 2 / (zg + z))
    assert sol.z21_eff[0, 0] == pytest.approx(z21 - z21 ** 3 / ((zg + z) * (zl + z)))


def test_shared_solve_matches_separate_functions():
    rng = np.random.default_rng(3)
    for _ in range(5):
        blocks, term, noise, gamma = random_link(rng)
        sol = solve_multiport(blocks, term, noise, gamma)
        assert np.allclose(sol.Z_in, input_impedance(blocks, term.z_load, gamma))
        assert np.allclose(sol.Z_out, output_impedance(blocks, term.z_gen, gamma))
        assert np.allclose(sol.z21_eff, effective_mutual_impedance(blocks, term.z_gen, term.z_load, gamma))


def test_reciprocity_of_port_impedances():
    rng = np.random.default_rng(4)
    blocks, term, noise, gamma = random_link(rng)
    sol = solve_multiport(blocks, term, noise, gamma)
    assert np.allclose(sol.Z_in, sol.Z_in.T)
    assert np.allclose(sol.Z_out, sol.Z_out.T)


def test_channel_identity_and_matched_filter():
    rng = np.random.default_rng(11)
    for _ in range(10):
        blocks, term, noise, gamma = random_link(rng)
        sol = solve_multiport(blocks, term, noise, gamma)
        h = channel_matrix(sol)
        snr = np.linalg.norm(h, 2) ** 2
        assert snr == pytest.approx(max_snr_generalized(sol.z21_eff, sol.Q, sol.re_z_in), rel=1e-10)
        assert np.allclose(physical_channel_matrix(sol), h, rtol=1e-8, atol=1e-8 * np.abs(h).max())


def test_square_roots_reproduce_b_and_r_eta():
    rng = np.random.default_rng(5)
    blocks, term, noise, gamma = random_link(rng)
    sol = solve_multiport(blocks, term, noise, gamma)
    bs = b_sqrt(sol)
    b = power_coupling(sol.Z_in, term.z_gen)
    assert np.allclose(bs @ bs.conj().T, b, rtol=1e-8, atol=1e-8 * np.abs(b).max())
    rs = r_eta_sqrt(sol)
    r = noise_coupling(sol)
    assert np.allclose(rs @ rs.conj().T, r, rtol=1e-8, atol=1e-8 * np.abs(r).max())


def test_q_is_psd_and_grows_with_lna_noise():
    rng = np.random.default_rng(8)
    blocks, term, _, gamma = random_link(rng, max_m=6)
    q0 = solve_multiport(blocks, term, ANTENNA_NOISE_ONLY, gamma).Q
    q1 = solve_multiport(blocks, term, ILLUSTRATIVE_LNA_NOISE, gamma).Q
    assert np.linalg.eigvalsh(q0)[0] >= -1e-12 * np.abs(q0).max()
    assert np.linalg.eigvalsh(q1 - q0)[0] >= -1e-12 * np.abs(q1).max()


def test_hermitian_sqrt_errors():
    with pytest.raises(NumericalError):
        hermitian_sqrt(np.diag([1.0, -1.0]))
    with pytest.raises(NumericalError):
        hermitian_sqrt(np.diag([1.0, 0.0]), inverse=True)
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    r = hermitian_sqrt(a)
    assert np.allclose(r @ r, a)
