import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupledarray.errors import DomainError
from coupledarray.geometry import (
    ArrayKind,
    Direction,
    chord_spacing,
    custom_positions,
    radius_for_spacing,
    steering_vector,
    uca_positions,
    ula_positions,
)


def test_ula_layout():
    g = ula_positions(4, 0.5)
    assert g.kind is ArrayKind.ULA
    assert np.allclose(g.positions[:, 1], [-0.75, -0.25, 0.25, 0.75])
    assert np.all(g.positions[:, [0, 2]] == 0)
    assert g.aperture == pytest.approx(1.5)
    assert g.structure == "toeplitz"


def test_uca_layout():
    g = uca_positions(6, 2.0)
    assert g.positions[0] == pytest.approx([2.0, 0.0, 0.0])
    assert np.allclose(np.linalg.norm(g.positions, axis=1), 2.0)
    assert g.spacing == pytest.approx(2.0)  # hexagon
    assert g.aperture == 4.0
    assert g.structure == "circulant"


def test_single_antenna_sits_at_origin():
    for g in (ula_positions(1, 0.5), uca_positions(1, 3.0)):
        assert np.all(g.positions == 0)
        assert g.aperture == 0


def test_distance_matrices_are_structured():
    g = ula_positions(7, 0.3)
    dist = g.distances()
    assert np.allclose(dist, np.abs(np.subtract.outer(np.arange(7), np.arange(7))) * 0.3)
    u = uca_positions(9, 1.7)
    du = u.distances()
    assert np.array_equal(du, du.T)
    for k in range(9):
        assert np.array_equal(np.roll(du[0], k), du[k])
    direct = np.linalg.norm(u.positions[:, None] - u.positions[None], axis=-1)
    assert np.allclose(du, direct, atol=1e-12)


def test_positions_are_read_only():
    g = ula_positions(3, 0.5)
    with pytest.raises(ValueError):
        g.positions[0, 0] = 1.0


def test_spacing_radius_round_trip():
    r = radius_for_spacing(130, 0.45)
    assert chord_spacing(130, r) == pytest.approx(0.45)


@pytest.mark.parametrize(
    "build",
    [
        lambda: ula_positions(0, 0.5),
        lambda: ula_positions(3, 0.0),
        lambda: ula_positions(3, 1e-7),
        lambda: uca_positions(2.5, 1.0),
        lambda: uca_positions(4, -1.0),
        lambda: custom_positions([[0, 0, 0], [1e-7, 0, 0]]),
        lambda: custom_positions([[1, 0, 0], [2, 0, 0]]),
        lambda: custom_positions([[0, 0, np.nan]]),
    ],
)
def test_invalid_geometries(build):
    with pytest.raises(DomainError):
        build()


def test_direction_validation_and_unit_vector():
    d = Direction.from_degrees(90)
    assert d.unit_vector() == pytest.approx([0, 1, 0], abs=1e-15)
    assert Direction().unit_vector() == pytest.approx([1, 0, 0])
    with pytest.raises(DomainError):
        Direction(theta=4.0)
    with pytest.raises(DomainError):
        Direction(phi=float("nan"))


def test_steering_vector_phases():
    g = ula_positions(3, 0.5)
    a = steering_vector(g, Direction.from_degrees(90))
    assert np.allclose(np.abs(a), 1)
    # endfire along +y: phase steps of 2 pi d
    assert np.allclose(a, np.exp(1j * np.pi * np.array([-1, 0, 1])))
    assert np.allclose(steering_vector(g, Direction()), 1)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 40), r=st.floats(0.5, 50))
def test_uca_centroid_and_symmetry(n, r):
    g = uca_positions(n, r)
    assert np.abs(g.positions.mean(axis=0)).max() < 1e-9 * r
    gen = g.generator_distances()
    assert np.array_equal(gen[1:], gen[1:][::-1])
