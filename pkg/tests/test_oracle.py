import numpy as np
import pytest
from conftest import random_system, small_layout

from fibers.action import TranslateSystem, synthesis
from fibers.errors import UnsupportedGroupError
from fibers.group import GroupElement, LatticePoint, identity, lattice_gamma1, preset
from fibers.oracle import (
    MAX_TRANSLATES,
    cocycle_phase,
    equality_lemma_check,
    homomorphism_check,
    relative_error,
    sumid_check,
    translate_gram,
    translate_gram_entry,
    translate_indices,
)
from fibers.range_function import essential_bounds, perturb_fiber_norm, random_span_element
from fibers.space import GridSpace
from fibers.transform import FiberField, fiber_norm, make_layout, random_field, t_transform


def test_relative_error():
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(1.0, 1.1) == pytest.approx(0.1 / 1.1)
    assert relative_error(1e-20, 0.0, floor=1.0) == pytest.approx(1e-20)


def test_translate_indices_order(heisenberg_system):
    indices = translate_indices(heisenberg_system)
    assert len(indices) == heisenberg_system.size == 9 * 4
    assert indices[0] == (0, (-1, -1), (0,))
    assert indices[1] == (0, (-1, -1), (1,))
    assert indices[4] == (0, (-1, 0), (0,))


def test_translate_gram_diagonal_is_generator_norm(heisenberg_system):
    TG = translate_gram(heisenberg_system)
    norm_sq = fiber_norm(heisenberg_system.generators[0]) ** 2
    np.testing.assert_allclose(np.diag(TG).real, norm_sq, rtol=1e-12)
    np.testing.assert_allclose(TG, TG.conj().T, atol=1e-12)


def test_translate_gram_entry_matches_matrix(heisenberg_system, rng):
    TG = translate_gram(heisenberg_system)
    indices = translate_indices(heisenberg_system)
    for _ in range(5):
        a, b = rng.integers(len(indices), size=2)
        entry = translate_gram_entry(heisenberg_system, indices[a], indices[b])
        assert entry == pytest.approx(TG[a, b], abs=1e-10)


def test_translate_gram_size_limit():
    layout = make_layout(preset("heisenberg3"), S=8, q=8, j_half=1)
    phi = FiberField.zeros(layout)
    system = TranslateSystem.build([phi], lattice_gamma1(layout.group, 22))
    assert system.size > MAX_TRANSLATES
    with pytest.raises(ValueError):
        translate_gram(system)


def test_orthonormal_fibers_give_orthonormal_translates(orthonormal_system):
    TG = translate_gram(orthonormal_system)
    assert np.abs(TG - np.eye(TG.shape[0])).max() <= 1e-8


def test_perturbed_fiber_breaks_orthonormality(orthonormal_system):
    perturbed = perturb_fiber_norm(orthonormal_system, 1, 1.1)
    TG = translate_gram(perturbed)
    deviation = np.abs(TG - np.eye(TG.shape[0])).max()
    # the diagonal alone moves by (1.1^2 - 1) / S
    assert deviation >= 0.05


def test_riesz_bounds_match_translate_gram_spectrum():
    layout = make_layout(preset("heisenberg3"), S=8, q=24, j_half=2)
    system = random_system(layout, np.random.default_rng(7))
    report = essential_bounds(system, "riesz")
    eigenvalues = np.linalg.eigvalsh(translate_gram(system))
    assert eigenvalues.min() == pytest.approx(report.lower, abs=1e-6)
    assert eigenvalues.max() == pytest.approx(report.upper, abs=1e-6)


# --- Identity checks ---

def _random_coefficients(system, rng, count):
    coeffs = {}
    for _ in range(count):
        index = int(rng.integers(len(system.generators)))
        k = system.gamma1[int(rng.integers(len(system.gamma1)))]
        m = tuple(int(v) for v in rng.integers(0, system.layout.S, size=system.layout.r))
        coeffs[(index, k, m)] = complex(rng.standard_normal(), rng.standard_normal())
    return coeffs


@pytest.mark.parametrize("name", ["abelian(1)", "abelian(2)", "heisenberg3", "twostep6", "threestep5"])
def test_equality_lemma(name, rng):
    layout = small_layout(name)
    for _ in range(50):
        system = random_system(layout, rng, generators=2)
        outcome = equality_lemma_check(_random_coefficients(system, rng, 6), system)
        assert outcome.rel_err <= 1e-9


def test_equality_lemma_single_coefficient(heisenberg_system):
    outcome = equality_lemma_check({(0, (1, 0), (2,)): 1.0}, heisenberg_system)
    norm_sq = fiber_norm(heisenberg_system.generators[0]) ** 2
    assert outcome.lhs == pytest.approx(norm_sq, rel=1e-12)
    assert outcome.rhs == pytest.approx(norm_sq, rel=1e-12)


def test_sumid_check(heisenberg_system, rng):
    zero = sumid_check(FiberField.zeros(heisenberg_system.layout), heisenberg_system)
    assert (zero.lhs, zero.rhs, zero.rel_err) == (0.0, 0.0, 0.0)
    f = t_transform(random_field(heisenberg_system.layout, rng))
    assert sumid_check(f, heisenberg_system).rel_err <= 1e-9


# --- Representation checks ---

@pytest.mark.parametrize("name, S, q", [
    ("heisenberg3", 4, 8),
    ("twostep6", 2, 4),
    ("abelian(2)", 3, 3),
])
def test_homomorphism_on_lattice(name, S, q, rng):
    spec = preset(name)
    space = GridSpace(d=spec.d, W=S, q=q)
    gamma1 = lattice_gamma1(spec, 1)
    for _ in range(10):
        lam = rng.integers(-2 * S, 2 * S, size=spec.r) / S
        a, b = (
            LatticePoint(k=gamma1[int(rng.integers(len(gamma1)))],
                         m=tuple(int(v) for v in rng.integers(0, S, size=spec.r))).element()
            for _ in range(2)
        )
        outcome = homomorphism_check(spec, space, lam, a, b)
        assert outcome.defect <= 1e-10
        assert outcome.scalar == pytest.approx(1.0, abs=1e-10)


def test_homomorphism_with_identity():
    spec = preset("heisenberg3")
    space = GridSpace(d=1, W=4, q=8)
    a = GroupElement(x=(1, 2), z=(3,))
    outcome = homomorphism_check(spec, space, [0.75], a, identity(spec))
    assert outcome.defect == pytest.approx(0.0, abs=1e-12)
    assert outcome.scalar == pytest.approx(1.0)


def test_heisenberg_cocycle_phase(rng):
    spec = preset("heisenberg3")
    space = GridSpace(d=1, W=4, q=8)
    for _ in range(10):
        lam = rng.integers(-8, 8) / 4
        a = GroupElement(x=tuple(float(v) for v in rng.integers(-2, 3, size=2)), z=(0.0,))
        b = GroupElement(x=tuple(float(v) for v in rng.integers(-2, 3, size=2)), z=(0.0,))
        outcome = cocycle_phase(spec, space, [lam], a, b)
        assert outcome.defect <= 1e-10
        expected = np.exp(2j * np.pi * lam * a.translation[0] * b.modulation[0])
        assert outcome.scalar == pytest.approx(expected, abs=1e-10)


def test_threestep5_has_no_group_law_checks():
    spec = preset("threestep5")
    space = GridSpace(d=2, W=2, q=2)
    with pytest.raises(UnsupportedGroupError):
        homomorphism_check(spec, space, [0.5], identity(spec), identity(spec))
    with pytest.raises(UnsupportedGroupError):
        cocycle_phase(spec, space, [0.5], identity(spec), identity(spec))


def test_riesz_bounds_bound_synthesis_norms():
    layout = make_layout(preset("heisenberg3"), S=8, q=24, j_half=2)
    system = random_system(layout, np.random.default_rng(7))
    report = essential_bounds(system, "riesz")
    rng = np.random.default_rng(8)
    for _ in range(10):
        coeffs = {
            key: complex(rng.standard_normal(), rng.standard_normal())
            for key in translate_indices(system)
            if rng.random() < 0.3
        }
        energy = sum(abs(a) ** 2 for a in coeffs.values())
        norm_sq = fiber_norm(synthesis(coeffs, system)) ** 2
        assert report.lower * energy - 1e-7 <= norm_sq <= report.upper * energy + 1e-7


def test_equality_lemma_reduces_to_bracket_identity(rng):
    layout = small_layout("abelian(1)")
    system = random_system(layout, rng)
    a = rng.standard_normal(layout.S) + 1j * rng.standard_normal(layout.S)
    coeffs = {(0, (), (m,)): a[m] for m in range(layout.S)}
    outcome = equality_lemma_check(coeffs, system)
    poly = np.exp(2j * np.pi * np.outer(layout.torus.points[:, 0], np.arange(layout.S))) @ a
    bracket = system.generators[0].fiber_norms() ** 2
    expected = float(np.mean(np.abs(poly) ** 2 * bracket))
    assert outcome.lhs == pytest.approx(expected, rel=1e-10)
    assert outcome.rhs == pytest.approx(expected, rel=1e-10)


def test_sumid_on_orthonormal_system(orthonormal_system, rng):
    f = random_span_element(orthonormal_system, rng)
    f = f.scaled(1 / fiber_norm(f))
    outcome = sumid_check(f, orthonormal_system)
    assert outcome.lhs == pytest.approx(1.0, abs=1e-9)
    assert outcome.rhs == pytest.approx(1.0, abs=1e-9)
