import numpy as np
import pytest
from conftest import SMALL_LAYOUTS, small_layout

from fibers.errors import EmptyModelError, LayoutMismatchError
from fibers.group import preset
from fibers.space import GridSpace, rank_one
from fibers.transform import (
    FiberIndexSet,
    FieldLayout,
    OperatorField,
    TorusGrid,
    build_generator,
    deperiodize,
    field_inner,
    field_norm,
    fiber_norm,
    make_layout,
    masked_slots,
    periodize,
    random_field,
    slot_index,
    t_transform,
    to_fiber_order,
    weight,
)
from models import GeneratorSpec


def test_heisenberg_lambda_grid(heisenberg_layout):
    layout = heisenberg_layout
    np.testing.assert_allclose(layout.lambdas[:, 0], np.arange(-4, 4) / 4)
    assert layout.n_sigma == 4 and layout.n_j == 2 and layout.D == 4
    # lambda = 0 is the only masked slot
    assert masked_slots(layout) == [(0, 1)]


@pytest.mark.parametrize("name", sorted(SMALL_LAYOUTS))
def test_fiber_order_matches_sigma_plus_j(name):
    layout = small_layout(name)
    np.testing.assert_allclose(to_fiber_order(layout, layout.lambdas), layout.fiber_lambdas)


@pytest.mark.parametrize("name", sorted(SMALL_LAYOUTS))
def test_periodize_round_trip_is_exact(name, rng):
    layout = small_layout(name)
    F = weight(random_field(layout, rng))
    back = deperiodize(periodize(F), layout)
    assert np.array_equal(back.data, F.data)


@pytest.mark.parametrize("name", ["abelian(2)", "heisenberg3", "twostep6", "threestep5"])
def test_parseval_chain(name, rng):
    layout = small_layout(name)
    for _ in range(100):
        F = random_field(layout, rng)
        lhs = field_norm(weight(F)) ** 2
        rhs = fiber_norm(t_transform(F)) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert field_norm(F) == pytest.approx(field_norm(weight(F)), rel=1e-12)


def test_transform_is_pfaffian_weighted(heisenberg_layout, rng):
    layout = heisenberg_layout
    F = random_field(layout, rng)
    ff = t_transform(F)
    expected = np.sqrt(np.abs(layout.fiber_lambdas[..., 0]))[..., None, None] * to_fiber_order(layout, F.data)
    np.testing.assert_allclose(ff.data, expected, atol=1e-14)


def test_weight_at_lambda_two():
    layout = make_layout(preset("heisenberg3"), S=2, q=2, j_half=3)
    F = OperatorField.from_array(layout, np.ones((layout.n_lambda, layout.D, layout.D)))
    (index,) = np.flatnonzero(np.isclose(layout.lambdas[:, 0], 2.0))
    np.testing.assert_allclose(weight(F).data[index], np.sqrt(2.0) * F.data[index])


def test_abelian_weight_is_identity(rng):
    layout = small_layout("abelian(2)")
    F = random_field(layout, rng)
    assert np.array_equal(weight(F).data, F.data)
    ff = t_transform(F)
    np.testing.assert_allclose(ff.data, to_fiber_order(layout, F.data))


def test_masked_slots_are_zero(heisenberg_layout, rng):
    F = random_field(heisenberg_layout, rng)
    assert np.all(F.data[~heisenberg_layout.mask] == 0)
    ff = t_transform(F)
    assert np.all(ff.data[~heisenberg_layout.fiber_mask] == 0)


def test_weight_twice_raises(heisenberg_layout, rng):
    with pytest.raises(ValueError):
        weight(weight(random_field(heisenberg_layout, rng)))


def test_single_slot_norm(heisenberg_layout):
    layout = heisenberg_layout
    (index,) = np.flatnonzero(np.isclose(layout.lambdas[:, 0], 0.75))
    data = np.zeros((layout.n_lambda, layout.D, layout.D), dtype=complex)
    data[index] = np.eye(layout.D) / np.sqrt(layout.D * layout.space.measure)
    F = OperatorField.from_array(layout, data)
    assert field_norm(F) ** 2 == pytest.approx(0.75 / layout.S)
    assert field_norm(OperatorField.zeros(layout)) == 0.0


def test_field_inner_is_positive(heisenberg_layout, rng):
    ff = t_transform(random_field(heisenberg_layout, rng))
    value = field_inner(ff, ff)
    assert value.real == pytest.approx(fiber_norm(ff) ** 2)
    assert abs(value.imag) < 1e-12


def test_nan_field_rejected(heisenberg_layout):
    data = np.zeros((heisenberg_layout.n_lambda, 4, 4))
    data[1, 0, 0] = np.nan
    with pytest.raises(ValueError):
        OperatorField.from_array(heisenberg_layout, data)


def test_all_masked_layout_raises():
    with pytest.raises(EmptyModelError):
        make_layout(preset("heisenberg3"), S=4, q=4, j_half=1, pf_eps=10.0)


def test_window_must_equal_torus_resolution():
    group = preset("heisenberg3")
    with pytest.raises(LayoutMismatchError):
        FieldLayout(group, TorusGrid(1, 4), FiberIndexSet.from_half_width(1, 1), GridSpace(1, 2, 4))


def test_deperiodize_rejects_other_layout(heisenberg_layout, rng):
    ff = t_transform(random_field(heisenberg_layout, rng))
    other = make_layout(preset("heisenberg3"), S=4, q=8, j_half=1)
    with pytest.raises(LayoutMismatchError):
        deperiodize(ff, other)


def test_slot_index():
    layout = make_layout(preset("twostep6"), S=2, q=2, j_half=1)
    assert slot_index(layout, (-1, -1)) == 0
    assert slot_index(layout, (0, 0)) == 3
    with pytest.raises(LayoutMismatchError):
        slot_index(layout, (1, 1))


# --- Generators ---

def test_random_generator_is_seeded(heisenberg_layout):
    spec = GeneratorSpec(kind="random", seed=5)
    a = build_generator(spec, heisenberg_layout)
    b = build_generator(spec, heisenberg_layout)
    assert np.array_equal(a.data, b.data)
    c = build_generator(GeneratorSpec(kind="random"), heisenberg_layout, default_seed=6)
    assert not np.array_equal(a.data, c.data)


def test_bandlimited_random_support():
    layout = make_layout(preset("heisenberg3"), S=4, q=4, j_half=2)
    F = build_generator(GeneratorSpec(kind="bandlimited-random", seed=1), layout)
    j = layout.lambda_indices[:, 0] // layout.S
    outside = (j < -1) | (j > 0)
    assert np.all(F.data[outside] == 0)
    assert np.any(F.data[~outside] != 0)


def test_bandlimited_random_needs_one_center_axis():
    layout = small_layout("twostep6")
    with pytest.raises(ValueError):
        build_generator(GeneratorSpec(kind="bandlimited-random", seed=1), layout)


def test_indicator_generator_with_diagonal_support():
    layout = make_layout(preset("twostep6"), S=2, q=4, j_half=1)
    spec = GeneratorSpec(
        kind="indicator-rank-one",
        box_u=[[0, 0.5], [0, 0.5]],
        box_v=[[0, 1], [0, 1]],
        support="diagonal",
    )
    F = build_generator(spec, layout)
    j = layout.lambda_indices // layout.S
    diagonal = j[:, 0] == j[:, 1]
    assert np.all(F.data[~diagonal] == 0)
    space = layout.space
    u = (space.points < 0.5).all(axis=1).astype(float)
    v = (space.points < 1.0).all(axis=1).astype(float)
    kept = np.flatnonzero(diagonal & layout.mask)
    assert kept.size > 0
    for index in kept:
        np.testing.assert_allclose(F.data[index], rank_one(space, u, v))


def test_gaussian_generator_decays(heisenberg_layout):
    F = build_generator(GeneratorSpec(kind="gaussian-rank-one", width=0.5), heisenberg_layout)
    norms = np.linalg.norm(F.data, axis=(1, 2))
    lambdas = heisenberg_layout.lambdas[:, 0]
    assert norms[np.isclose(lambdas, -1.0)][0] < norms[np.isclose(lambdas, -0.25)][0]


def test_bspline_profile():
    layout = make_layout(preset("abelian(1)"), S=8, q=8, j_half=2)
    F = build_generator(GeneratorSpec(kind="bspline", order=2), layout)
    np.testing.assert_allclose(F.data[:, 0, 0], np.sinc(layout.lambdas[:, 0]) ** 2, atol=1e-15)
