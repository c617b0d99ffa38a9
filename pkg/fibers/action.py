"""
Lattice action on fibers.

A lattice point gamma = (k, m) acts on a fiber field by
    (T L_gamma phi)(sigma) = e^{2 pi i <sigma, m>} pi~_sigma(k) T phi(sigma),
with (pi~_sigma(k) h)_j = pi_{sigma+j}(k) h_j. Central indices m run over
the full Z_S^r so every Fourier inversion over m is an exact DFT.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, List, Literal, Mapping, Sequence, Tuple

import numpy as np

from .errors import LayoutMismatchError
from .group import GroupElement, LatticePoint, rep_apply
from .transform import FiberField, FiberVector, FieldLayout, check_same_layout

CoefficientKey = Tuple[int, Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class TranslateSystem:
    """
    The system E(A) = {L_gamma phi : gamma in Gamma, phi in A}, given by the
    transformed generators T phi and the truncated Gamma_1.
    """

    generators: Tuple[FiberField, ...]
    gamma1: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not self.generators:
            raise ValueError("A translate system needs at least one generator")
        for ff in self.generators[1:]:
            check_same_layout(self.generators[0].layout, ff.layout)
        d = self.layout.group.d
        for k in self.gamma1:
            if len(k) != 2 * d:
                raise LayoutMismatchError(f"Lattice point {k} does not have 2d={2 * d} coordinates")

    @classmethod
    def build(cls, generators: Sequence[FiberField], gamma1: Sequence[Sequence[int]]) -> "TranslateSystem":
        return cls(tuple(generators), tuple(tuple(int(v) for v in k) for k in gamma1))

    @property
    def layout(self) -> FieldLayout:
        return self.generators[0].layout

    @property
    def central_points(self) -> List[Tuple[int, ...]]:
        """Gamma_0 modelled as Z_S^r, lexicographic"""
        return list(itertools.product(range(self.layout.S), repeat=self.layout.r))

    @property
    def size(self) -> int:
        """Number of translates over (phi, k, m)"""
        return len(self.generators) * len(self.gamma1) * len(self.central_points)

    def with_generators(self, generators: Sequence[FiberField]) -> "TranslateSystem":
        return TranslateSystem(tuple(generators), self.gamma1)


def central_character(sigma: Sequence[float], m: Sequence[int]) -> complex:
    """e^{2 pi i <sigma, m>}"""
    sigma = np.asarray(sigma, dtype=float)
    m = np.asarray(m, dtype=float)
    if sigma.shape != m.shape:
        raise LayoutMismatchError(f"sigma {sigma.shape} and m {m.shape} differ in length")
    return complex(np.exp(2j * np.pi * np.dot(sigma, m)))


def central_characters(layout: FieldLayout, m: Sequence[int]) -> np.ndarray:
    """e^{2 pi i <sigma, m>} for every torus point"""
    m = np.asarray(m, dtype=float)
    if m.shape != (layout.r,):
        raise LayoutMismatchError(f"Central index {list(m)} must have r={layout.r} entries")
    return np.exp(2j * np.pi * layout.torus.points @ m)


def _lattice_element(layout: FieldLayout, k: Sequence[int]) -> GroupElement:
    if len(k) != 2 * layout.group.d:
        raise LayoutMismatchError(f"Lattice point {list(k)} does not have 2d={2 * layout.group.d} coordinates")
    return LatticePoint(k=tuple(k), m=(0,) * layout.r).element()


def act_on_fibers(layout: FieldLayout, k: Sequence[int], data: np.ndarray) -> np.ndarray:
    """
    pi~(k) applied to a (S^r, Nj, D, D) array of fibers at once.
    Masked slots are returned as zero.
    """
    element = _lattice_element(layout, k)
    n = layout.n_sigma * layout.n_j
    flat = data.reshape(n, layout.D, layout.D)
    out = rep_apply(layout.group, layout.space, layout.fiber_lambdas.reshape(n, layout.r), element, flat)
    out = out.reshape(data.shape)
    out[~layout.fiber_mask] = 0
    return out


def fiber_action(k: Sequence[int], h: FiberVector) -> FiberVector:
    """(pi~_sigma(k) h)_j = pi_{sigma+j}(k) h_j at the sigma of h"""
    layout = h.layout
    lambdas = layout.fiber_lambdas[h.sigma_index]
    out = rep_apply(layout.group, layout.space, lambdas, _lattice_element(layout, k), h.data)
    out[~layout.fiber_mask[h.sigma_index]] = 0
    return FiberVector(layout, h.sigma_index, out)


def translate(ff: FiberField, gamma: LatticePoint) -> FiberField:
    """T(L_gamma phi) = e^{2 pi i <sigma, m>} pi~_sigma(k) T phi(sigma)"""
    layout = ff.layout
    chi = central_characters(layout, gamma.m)
    return FiberField(layout, chi[:, None, None, None] * act_on_fibers(layout, gamma.k, ff.data))


def _fiber_inners(a: np.ndarray, b: np.ndarray, measure: float) -> np.ndarray:
    # <a(sigma), b(sigma)>_L for every sigma, linear in a
    return measure * np.einsum("sjab,sjab->s", a, b.conj())


def analysis_coefficient(f: FiberField, phi: FiberField, gamma: LatticePoint) -> complex:
    """
    <f, L_gamma phi> on the Fourier side:
    S^-r sum_sigma e^{-2 pi i <sigma, m>} <Tf(sigma), pi~_sigma(k) T phi(sigma)>_L
    """
    check_same_layout(f.layout, phi.layout)
    layout = f.layout
    acted = act_on_fibers(layout, gamma.k, phi.data)
    inners = _fiber_inners(f.data, acted, layout.space.measure)
    chi = central_characters(layout, gamma.m)
    return complex(np.sum(chi.conj() * inners) / layout.S ** layout.r)


def frame_sum(f: FiberField, system: TranslateSystem,
              method: Literal["direct", "fiber"] = "fiber") -> float:
    """
    sum over (phi, k, m) of |<f, L_(k,m) phi>|^2.

    direct recomputes every coefficient with analysis_coefficient;
    fiber sums |<Tf(sigma), pi~_sigma(k) T phi(sigma)>|^2 over sigma.
    """
    check_same_layout(f.layout, system.layout)
    layout = system.layout
    if method == "direct":
        total = 0.0
        for phi in system.generators:
            for k in system.gamma1:
                for m in system.central_points:
                    total += abs(analysis_coefficient(f, phi, LatticePoint(k=k, m=m))) ** 2
        return float(total)
    if method == "fiber":
        total = 0.0
        for phi in system.generators:
            for k in system.gamma1:
                inners = _fiber_inners(f.data, act_on_fibers(layout, k, phi.data), layout.space.measure)
                total += float(np.sum(np.abs(inners) ** 2))
        return total / layout.S ** layout.r
    raise ValueError(f"Unknown frame_sum method '{method}', expected 'direct' or 'fiber'")


def _check_key(system: TranslateSystem, key: CoefficientKey):
    index, k, m = key
    layout = system.layout
    if not 0 <= index < len(system.generators):
        raise ValueError(f"Coefficient key {key}: generator index {index} out of range")
    if tuple(k) not in system.gamma1:
        raise ValueError(f"Coefficient key {key}: k={tuple(k)} is not in the truncated Gamma_1")
    if len(m) != layout.r or any(not 0 <= v < layout.S for v in m):
        raise ValueError(f"Coefficient key {key}: m must lie in Z_{layout.S}^{layout.r}")


def synthesis(coeffs: Mapping[CoefficientKey, complex], system: TranslateSystem) -> FiberField:
    """T of sum a_(phi,k,m) L_(k,m) phi"""
    out = FiberField.zeros(system.layout)
    for key in sorted(coeffs):
        _check_key(system, key)
        index, k, m = key
        translated = translate(system.generators[index], LatticePoint(k=tuple(k), m=tuple(m)))
        out = out + translated.scaled(coeffs[key])
    return out


def trig_polynomials(coeffs: Mapping[CoefficientKey, complex],
                     system: TranslateSystem) -> Dict[Tuple[int, Tuple[int, ...]], np.ndarray]:
    """
    P_(phi,k)(sigma) = sum_m a_(phi,k,m) e^{2 pi i <sigma, m>} on the torus grid,
    evaluated by direct DFT.
    """
    layout = system.layout
    polys: Dict[Tuple[int, Tuple[int, ...]], np.ndarray] = {}
    for key in sorted(coeffs):
        _check_key(system, key)
        index, k, m = key
        slot = (index, tuple(k))
        if slot not in polys:
            polys[slot] = np.zeros(layout.n_sigma, dtype=complex)
        polys[slot] += coeffs[key] * central_characters(layout, m)
    return polys


def equality_lemma_rhs(coeffs: Mapping[CoefficientKey, complex], system: TranslateSystem) -> float:
    """S^-r sum_sigma || sum_(phi,k) P_(phi,k)(sigma) pi~_sigma(k) T phi(sigma) ||_L^2"""
    layout = system.layout
    combined = np.zeros((layout.n_sigma, layout.n_j, layout.D, layout.D), dtype=complex)
    for (index, k), poly in sorted(trig_polynomials(coeffs, system).items()):
        acted = act_on_fibers(layout, k, system.generators[index].data)
        combined += poly[:, None, None, None] * acted
    return float(layout.space.measure * np.sum(np.abs(combined) ** 2) / layout.S ** layout.r)


def trig_parseval(coeffs: Sequence[complex], layout: FieldLayout) -> Tuple[float, float]:
    """
    (sum_m |a_m|^2, S^-r sum_sigma |P_a(sigma)|^2) for a coefficient array over
    Z_S^r in lexicographic order.
    """
    a = np.asarray(coeffs, dtype=complex)
    if a.shape != (layout.n_sigma,):
        raise LayoutMismatchError(f"Expected {layout.n_sigma} coefficients over Z_S^r, got {a.shape}")
    phases = np.exp(2j * np.pi * layout.torus.points @ layout.torus.indices.T)
    poly = phases @ a
    return float(np.sum(np.abs(a) ** 2)), float(np.sum(np.abs(poly) ** 2) / layout.S ** layout.r)
