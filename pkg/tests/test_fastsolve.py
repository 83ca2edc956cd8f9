import numpy as np
import pytest
import scipy.linalg as sl

from coupledarray.arraygain import transmit_array_gain_far_field
from coupledarray.errors import DomainError, NumericalError
from coupledarray.fastsolve import (
    StructuredMatrix,
    StructureKind,
    levinson_symmetric,
    quadratic_form,
    solve,
    solve_low_rank_update,
)
from coupledarray.geometry import Direction, radius_for_spacing, uca_positions, ula_positions
from coupledarray.impedance import impedance_generator, radiation_resistance


def _rhs(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _rel(x, y):
    return np.linalg.norm(x - y) / np.linalg.norm(y)


@pytest.mark.parametrize("kind", [StructureKind.TOEPLITZ, StructureKind.CIRCULANT])
def test_scaled_identity(kind):
    c = 1e-3 * radiation_resistance()
    g = np.zeros(16)
    g[0] = c
    b = _rhs(np.random.default_rng(0), 16)
    x = solve(StructuredMatrix(kind, g), b)
    assert np.allclose(x, b / c, rtol=1e-14)


def test_random_circulant_pd():
    rng = np.random.default_rng(1)
    n = 64
    half = rng.standard_normal(n // 2 + 1)
    g = np.concatenate([half, half[1:-1][::-1]])
    lam = np.fft.fft(g).real
    g[0] += 1.0 - lam.min()  # shift to positive definite
    a = StructuredMatrix.circulant(g)
    b = _rhs(rng, n)
    assert _rel(solve(a, b), np.linalg.solve(a.to_dense(), b)) < 1e-10
    assert np.abs(np.fft.fft(g).imag).max() < 1e-12 * np.abs(g).max()


@pytest.mark.parametrize("n", [2, 17, 256, 2048])
def test_impedance_structures_match_dense(n):
    rng = np.random.default_rng(n)
    rr = radiation_resistance()
    b = _rhs(rng, n)
    for geom, kind in (
        (ula_positions(n, 0.45), StructureKind.TOEPLITZ),
        (uca_positions(n, radius_for_spacing(n, 0.45)), StructureKind.CIRCULANT),
    ):
        gen = impedance_generator(geom)
        real = StructuredMatrix(kind, gen.real).shifted(1e-3 * rr)
        x, info = solve(real, b, return_info=True)
        assert not info.fallback
        assert info.residual < 1e-10
        assert _rel(x, sl.solve(real.to_dense(), b)) < 1e-8
        comp = StructuredMatrix(kind, gen).shifted(73.08 - 42.5j)
        assert not comp.hermitian
        assert _rel(solve(comp, b), sl.solve(comp.to_dense(), b)) < 1e-8


def test_levinson_matches_dense_and_reports_pd():
    t = 0.5 ** np.arange(12)
    b = np.arange(12.0)
    x, betas = levinson_symmetric(t, b)
    assert np.allclose(x, sl.solve_toeplitz(t, b))
    assert np.all(betas > 0)


def test_indefinite_raises():
    with pytest.raises(NumericalError):
        solve(StructuredMatrix.toeplitz(np.array([1.0, 2.0, 0.0])), np.ones(3))
    with pytest.raises(NumericalError):
        solve(StructuredMatrix.circulant(np.array([1.0, 2.0, 2.0])), np.ones(3))


def test_ill_conditioned_falls_back_to_dense():
    k = np.arange(40)
    t = np.exp(-((0.25 * k) ** 2))  # Gaussian kernel: PD, condition about 1.6e15
    a = StructuredMatrix.toeplitz(t)
    b = np.ones(40)
    x, info = solve(a, b, return_info=True)
    assert info.fallback
    assert info.path == "dense-fallback"
    assert info.notes


def test_woodbury_rank2_update():
    rng = np.random.default_rng(9)
    n = 100
    base = StructuredMatrix.toeplitz(impedance_generator(ula_positions(n, 0.4)).real).shifted(0.07)
    u = _rhs(rng, n) * 0.01
    c = 0.004 - 0.002j
    dense = base.to_dense() - np.real(c * np.outer(u, u))
    uu = np.column_stack([u, u.conj()])
    vv = np.column_stack([u.conj(), u])
    cc = -0.5 * np.diag([c, np.conj(c)])
    b = _rhs(rng, n)
    x = solve_low_rank_update(base, uu, cc, vv, b)
    assert _rel(x, np.linalg.solve(dense, b)) < 1e-10


def test_quadratic_form():
    a = StructuredMatrix.toeplitz(np.array([2.0, 0.5, 0.1]))
    v = np.array([1.0, 1j, -1.0])
    q = quadratic_form(a, v)
    assert q > 0
    assert q == pytest.approx(np.real(np.vdot(v, np.linalg.solve(a.to_dense(), v))))
    with pytest.raises(DomainError):
        quadratic_form(StructuredMatrix.toeplitz(np.array([2.0, 0.5j])), v[:2])


def test_invalid_structures():
    with pytest.raises(DomainError):
        StructuredMatrix.circulant(np.array([1.0, 0.2, 0.3]))
    with pytest.raises(DomainError):
        StructuredMatrix.dense(np.ones((2, 3)))
    with pytest.raises(DomainError):
        solve(StructuredMatrix.toeplitz(np.array([1.0, 0.1])), np.ones(3))


def test_uca_far_field_fast_equals_dense():
    g = uca_positions(1024, radius_for_spacing(1024, 0.5))
    d = Direction()
    fast = transmit_array_gain_far_field(g, d, 1e-3, method="structured")
    dense = transmit_array_gain_far_field(g, d, 1e-3, method="dense")
    assert fast == pytest.approx(dense, rel=1e-8)


def test_matvec_consistency():
    rng = np.random.default_rng(2)
    gen = impedance_generator(uca_positions(12, 1.3))
    for a in (StructuredMatrix.circulant(gen), StructuredMatrix.toeplitz(gen)):
        x = _rhs(rng, 12)
        assert np.allclose(a.matvec(x), a.to_dense() @ x)


def test_condition_estimate_tracks_exact_value():
    t = np.exp(-((0.35 * np.arange(40)) ** 2))
    _, info = solve(StructuredMatrix.toeplitz(t), np.ones(40), return_info=True)
    exact = np.linalg.cond(sl.toeplitz(t), 1)
    assert exact / 10 < info.condition <= exact * (1 + 1e-6)
