"""
Brute-force verifiers.
Everything here is computed from whole translated fields and explicit
representation matrices; none of it reuses fiber Gramians or range samples.
"""

from dataclasses import dataclass
from typing import List, Mapping, Sequence, Tuple

import numpy as np

from .action import (
    CoefficientKey,
    TranslateSystem,
    analysis_coefficient,
    equality_lemma_rhs,
    frame_sum,
    synthesis,
    translate,
)
from .errors import UnsupportedGroupError
from .group import GroupElement, GroupSpec, LatticePoint, add_coordinates, multiply, rep_matrix
from .space import GridSpace
from .transform import FiberField, fiber_norm

MAX_TRANSLATES = 4096

TranslateIndex = Tuple[int, Tuple[int, ...], Tuple[int, ...]]


def relative_error(lhs: float, rhs: float, floor: float = 0.0) -> float:
    """|lhs - rhs| / max(|lhs|, |rhs|, floor), zero when both sides vanish"""
    scale = max(abs(lhs), abs(rhs), floor)
    if scale == 0:
        return 0.0
    return abs(lhs - rhs) / scale


def translate_indices(system: TranslateSystem) -> List[TranslateIndex]:
    """(phi, k, m) in generator-major, k-lexicographic, m-lexicographic order"""
    return [
        (index, k, m)
        for index in range(len(system.generators))
        for k in system.gamma1
        for m in system.central_points
    ]


def translate_gram(system: TranslateSystem) -> np.ndarray:
    """
    Gram matrix of E(A) over all (phi, k, m): TG[a, b] = <L_b phi_b, L_a phi_a>.

    Raises:
        ValueError: more than MAX_TRANSLATES translates
    """
    if system.size > MAX_TRANSLATES:
        raise ValueError(
            f"translate_gram is limited to {MAX_TRANSLATES} translates, this system has {system.size}"
        )
    layout = system.layout
    rows = []
    for index, k, m in translate_indices(system):
        translated = translate(system.generators[index], LatticePoint(k=k, m=m))
        rows.append(translated.data.reshape(-1))
    V = np.stack(rows)
    TG = layout.space.measure * (V.conj() @ V.T) / layout.S ** layout.r
    return (TG + TG.conj().T) / 2


def translate_gram_entry(system: TranslateSystem, alpha: TranslateIndex, beta: TranslateIndex) -> complex:
    """One entry TG[alpha, beta] = <L_beta phi_beta, L_alpha phi_alpha> via analysis_coefficient"""
    a_index, a_k, a_m = alpha
    b_index, b_k, b_m = beta
    f = translate(system.generators[b_index], LatticePoint(k=tuple(b_k), m=tuple(b_m)))
    return analysis_coefficient(f, system.generators[a_index], LatticePoint(k=tuple(a_k), m=tuple(a_m)))


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    rel_err: float


def equality_lemma_check(coeffs: Mapping[CoefficientKey, complex], system: TranslateSystem) -> IdentityCheck:
    """
    ||sum a L_(k,m) phi||^2 computed directly against the fiber-side
    S^-r sum_sigma ||sum P_(phi,k)(sigma) pi~_sigma(k) T phi(sigma)||^2.
    """
    lhs = fiber_norm(synthesis(coeffs, system)) ** 2
    rhs = equality_lemma_rhs(coeffs, system)
    return IdentityCheck(lhs, rhs, relative_error(lhs, rhs))


def sumid_check(f: FiberField, system: TranslateSystem) -> IdentityCheck:
    """Coefficient-sum identity: direct sum over all coefficients against the fiber formula"""
    direct = frame_sum(f, system, method="direct")
    fiber = frame_sum(f, system, method="fiber")
    return IdentityCheck(direct, fiber, relative_error(direct, fiber))


@dataclass(frozen=True)
class HomomorphismCheck:
    defect: float
    scalar: complex


def _scalar_defect(left: np.ndarray, right: np.ndarray) -> HomomorphismCheck:
    # c from the largest entry of right, then ||left - c right||_max
    index = np.unravel_index(np.argmax(np.abs(right)), right.shape)
    c = left[index] / right[index]
    return HomomorphismCheck(defect=float(np.abs(left - c * right).max()), scalar=complex(c))


def homomorphism_check(spec: GroupSpec, space: GridSpace, lam: Sequence[float],
                       a: GroupElement, b: GroupElement) -> HomomorphismCheck:
    """pi(a) pi(b) against c * pi(a*b), c the best unimodular scalar"""
    if not spec.has_group_law:
        raise UnsupportedGroupError(f"homomorphism_check needs a group law, {spec.name} has none")
    product = rep_matrix(spec, space, lam, a) @ rep_matrix(spec, space, lam, b)
    return _scalar_defect(product, rep_matrix(spec, space, lam, multiply(spec, a, b)))


def cocycle_phase(spec: GroupSpec, space: GridSpace, lam: Sequence[float],
                  a: GroupElement, b: GroupElement) -> HomomorphismCheck:
    """pi(a) pi(b) against c * pi(a + b) with coordinatewise addition"""
    if not spec.has_group_law:
        raise UnsupportedGroupError(f"cocycle_phase needs a group law, {spec.name} has none")
    product = rep_matrix(spec, space, lam, a) @ rep_matrix(spec, space, lam, b)
    return _scalar_defect(product, rep_matrix(spec, space, lam, add_coordinates(a, b)))


def unitarity_defect(U: np.ndarray) -> float:
    """||U* U - I||_max"""
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())
