import numpy as np
import pytest

from fibers.errors import LayoutMismatchError
from fibers.space import GridSpace, grid_norm, hs_inner, hs_norm, indicator, rank_one


def _random_operator(space, rng):
    shape = (space.dim, space.dim)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_unitary(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def test_grid_space_requires_multiple_of_window():
    with pytest.raises(ValueError):
        GridSpace(d=1, W=4, q=6)


def test_grid_space_points():
    space = GridSpace(d=2, W=2, q=4)
    assert space.dim == 16
    assert space.spacing == 0.5
    assert space.measure == 0.25
    assert space.points.shape == (16, 2)
    np.testing.assert_allclose(space.points[1], [0.0, 0.5])
    np.testing.assert_allclose(space.points[4], [0.5, 0.0])


def test_scalar_space():
    space = GridSpace(d=0, W=3, q=3)
    assert space.dim == 1
    assert space.measure == 1.0
    np.testing.assert_allclose(indicator(space, []), [1.0])


def test_identity_inner_product():
    space = GridSpace(d=1, W=2, q=4)
    assert hs_inner(space, space.identity(), space.identity()) == pytest.approx(2.0)


def test_hs_inner_is_hermitian_and_positive(rng):
    space = GridSpace(d=1, W=2, q=4)
    A, B = _random_operator(space, rng), _random_operator(space, rng)
    assert hs_inner(space, A, B) == pytest.approx(np.conj(hs_inner(space, B, A)))
    assert hs_inner(space, A, A).real > 0
    assert abs(hs_inner(space, A, A).imag) < 1e-12
    assert abs(hs_inner(space, A, B)) <= hs_norm(space, A) * hs_norm(space, B) + 1e-12


def test_hs_inner_is_unitarily_invariant(rng):
    space = GridSpace(d=1, W=2, q=4)
    A, B = _random_operator(space, rng), _random_operator(space, rng)
    U = _random_unitary(space.dim, rng)
    assert hs_inner(space, U @ A, U @ B) == pytest.approx(hs_inner(space, A, B), rel=1e-12)


def test_rank_one_on_unit_grid():
    space = GridSpace(d=1, W=4, q=4)
    e0 = np.eye(4)[0]
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    np.testing.assert_allclose(rank_one(space, e0, e0), expected)


def test_rank_one_norm_factorizes(rng):
    space = GridSpace(d=1, W=2, q=4)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert hs_norm(space, rank_one(space, u, v)) == pytest.approx(grid_norm(space, u) * grid_norm(space, v))


def test_rank_one_commutes_with_left_action(rng):
    space = GridSpace(d=1, W=2, q=4)
    u, v = rng.standard_normal(4), rng.standard_normal(4)
    U = _random_unitary(4, rng)
    np.testing.assert_allclose(U @ rank_one(space, u, v), rank_one(space, U @ u, v), atol=1e-12)


def test_indicator_is_half_open():
    space = GridSpace(d=1, W=2, q=4)
    np.testing.assert_allclose(indicator(space, [[0.0, 0.5]]), [1, 0, 0, 0])
    np.testing.assert_allclose(indicator(space, [[0.5, 1.5]]), [0, 1, 1, 0])


def test_shape_mismatch_raises():
    space = GridSpace(d=1, W=2, q=4)
    with pytest.raises(LayoutMismatchError):
        hs_inner(space, np.eye(3), np.eye(4))
    with pytest.raises(LayoutMismatchError):
        rank_one(space, np.ones(3), np.ones(4))
