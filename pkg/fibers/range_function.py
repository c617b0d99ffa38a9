"""
Range functions and fiber Gramians.

At each torus point sigma the fiber system {pi~_sigma(k) T phi(sigma)} spans
J(sigma). Its Gramian carries the frame, Riesz and orthonormality properties
of the whole translate system; the essential bounds are the extremes over
the sigma grid.
"""

import sys
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from models import FiberBounds, GramianReport

from .action import TranslateSystem, act_on_fibers, fiber_action
from .errors import DegenerateSystemError, LayoutMismatchError
from .transform import FiberField, FiberVector, FieldLayout, check_same_layout
from .worker_pool import map_ordered

Mode = Literal["frame", "riesz", "bessel"]


# --- Fiber systems and Gramians ---

def fiber_stack(sigma_index: int, system: TranslateSystem) -> np.ndarray:
    """(|A|*|Gamma_1|, Nj, D, D) array of fiber vectors, generator major, k lexicographic"""
    vectors = [
        fiber_action(k, phi.at(sigma_index)).data
        for phi in system.generators
        for k in system.gamma1
    ]
    return np.stack(vectors)


def fiber_system(sigma_index: int, system: TranslateSystem) -> List[FiberVector]:
    """T(E(A))(sigma) = [pi~_sigma(k) T phi(sigma) for phi in A, k in Gamma_1]"""
    return [FiberVector(system.layout, sigma_index, v) for v in fiber_stack(sigma_index, system)]


def _gram(stack: np.ndarray, measure: float) -> np.ndarray:
    flat = stack.reshape(stack.shape[0], -1)
    G = measure * (flat.conj() @ flat.T)
    return (G + G.conj().T) / 2


def gramian(vectors: Sequence[FiberVector]) -> np.ndarray:
    """G[i, j] = <v_j, v_i>_L, Hermitian"""
    if not vectors:
        raise ValueError("gramian needs at least one vector")
    layout = vectors[0].layout
    for v in vectors[1:]:
        check_same_layout(layout, v.layout)
        if v.sigma_index != vectors[0].sigma_index:
            raise LayoutMismatchError("gramian vectors must live at the same sigma")
    return _gram(np.stack([v.data for v in vectors]), layout.space.measure)


def spectrum(G: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, descending"""
    return scipy.linalg.eigh(G, eigvals_only=True)[::-1]


def frame_bounds(G: np.ndarray, mode: Mode = "frame",
                 rank_rel_tol: float = 1e-9) -> Tuple[Optional[float], float]:
    """
    Bounds (A, B) of the system with Gramian G.

    Args:
        G: Hermitian positive semidefinite Gramian
        mode: frame (bounds on the span), riesz or bessel (A is None)
        rank_rel_tol: eigenvalues at or below rank_rel_tol * lambda_max count as zero

    Returns:
        (A, B)
    """
    eigenvalues = spectrum(G)
    lam_max = float(eigenvalues[0])
    if lam_max <= 0:
        raise DegenerateSystemError("Gramian has no positive eigenvalue")
    cutoff = rank_rel_tol * lam_max
    if mode == "frame":
        return float(eigenvalues[eigenvalues > cutoff][-1]), lam_max
    if mode == "riesz":
        lam_min = float(eigenvalues[-1])
        if lam_min <= cutoff:
            raise DegenerateSystemError(
                f"Gramian is rank-deficient (lambda_min={lam_min:.3e} <= {cutoff:.3e}), "
                f"the system is not a Riesz family"
            )
        return lam_min, lam_max
    if mode == "bessel":
        return None, lam_max
    raise ValueError(f"Unknown mode '{mode}', expected frame, riesz or bessel")


def fiber_bounds(sigma_index: int, system: TranslateSystem, mode: Mode,
                 rank_rel_tol: float) -> FiberBounds:
    layout = system.layout
    sigma = layout.torus.points[sigma_index]
    G = _gram(fiber_stack(sigma_index, system), layout.space.measure)
    eigenvalues = spectrum(G)
    lam_max = float(eigenvalues[0])
    rank = int(np.sum(eigenvalues > rank_rel_tol * lam_max)) if lam_max > 0 else 0
    lower, upper = None, None
    if rank > 0 or mode == "riesz":
        try:
            lower, upper = frame_bounds(G, mode, rank_rel_tol)
        except DegenerateSystemError as e:
            raise DegenerateSystemError(str(e), sigma=sigma.tolist())
    return FiberBounds(
        sigma=sigma.tolist(),
        rank=rank,
        lower=lower,
        upper=upper,
        eigenvalues=eigenvalues.tolist(),
    )


def essential_bounds(system: TranslateSystem, mode: Mode = "frame",
                     rank_rel_tol: float = 1e-9, threads: int = 1) -> GramianReport:
    """
    Per-sigma fiber bounds and their essential extremes A = min A(sigma),
    B = max B(sigma). Fibers with a zero Gramian are excluded.
    """
    layout = system.layout
    fibers = map_ordered(
        lambda s: fiber_bounds(s, system, mode, rank_rel_tol),
        range(layout.n_sigma),
        threads,
    )
    active = [fb for fb in fibers if fb.rank > 0]
    if not active:
        raise DegenerateSystemError("Every fiber Gramian is zero")

    lower = min(fb.lower for fb in active) if mode != "bessel" else None
    upper = max(fb.upper for fb in active)
    print(f"🧮 Essential {mode} bounds over {len(active)}/{len(fibers)} fibers: A={lower}, B={upper}", file=sys.stderr)
    return GramianReport(
        group=layout.group.name,
        S=layout.S,
        q=layout.space.q,
        j_min=list(layout.fibers.j_min),
        j_max=list(layout.fibers.j_max),
        gamma1_radius=max((max(abs(v) for v in k) for k in system.gamma1 if k), default=0),
        mode=mode,
        pf_eps=layout.pf_eps,
        rank_rel_tol=rank_rel_tol,
        lower=lower,
        upper=upper,
        excluded_sigmas=len(fibers) - len(active),
        fibers=fibers,
    )


# --- Constructions on generators ---

def _tracial_slots(system: TranslateSystem, tol: float = 1e-9) -> np.ndarray:
    """
    (S^r, Nj) mask of slots where tr(pi(k)* pi(k')) / D = delta_kk' for all
    k, k' in the truncated Gamma_1.
    """
    layout = system.layout
    eye = np.broadcast_to(layout.space.identity(), (layout.n_sigma, layout.n_j, layout.D, layout.D))
    reps = np.stack([act_on_fibers(layout, k, eye.copy()) for k in system.gamma1])
    traces = np.einsum("ksjab,lsjab->sjkl", reps.conj(), reps) / layout.D
    deviation = np.abs(traces - np.eye(len(system.gamma1))).max(axis=(2, 3))
    return (deviation <= tol) & layout.fiber_mask


def orthonormalize_fibers(system: TranslateSystem, check_tol: float = 1e-9) -> TranslateSystem:
    """
    Replace the generator by psi with an orthonormal fiber system at every sigma.

    On each tracial slot T psi(sigma)_j is the unitary polar factor of
    T phi(sigma)_j scaled to carry the fraction w_j of the fiber norm, so the
    fiber Gramian is sum_j w_j tr(pi(k)* pi(k')) / D = identity.
    """
    if len(system.generators) != 1:
        raise ValueError(f"orthonormalize_fibers needs a single generator, got {len(system.generators)}")
    layout = system.layout
    n_gamma = len(system.gamma1)
    fiber_dim = layout.n_j * layout.D ** 2
    if fiber_dim < n_gamma:
        raise DegenerateSystemError(f"Fiber dimension {fiber_dim} is smaller than |Gamma_1|={n_gamma}")

    phi = system.generators[0]
    tracial = _tracial_slots(system)
    slot_norms = np.sum(np.abs(phi.data) ** 2, axis=(2, 3)) * tracial
    out = np.zeros_like(phi.data)
    for s in range(layout.n_sigma):
        total = slot_norms[s].sum()
        if total <= 0:
            raise DegenerateSystemError(
                "No tracial fiber slot carries the generator, cannot orthonormalize",
                sigma=layout.torus.points[s].tolist(),
            )
        for j in np.flatnonzero(slot_norms[s] > 0):
            unitary, _ = scipy.linalg.polar(phi.data[s, j])
            scale = np.sqrt(slot_norms[s, j] / total / (layout.space.measure * layout.D))
            out[s, j] = scale * unitary

    result = system.with_generators([FiberField(layout, out)])
    for s in range(layout.n_sigma):
        G = _gram(fiber_stack(s, result), layout.space.measure)
        deviation = float(np.abs(G - np.eye(n_gamma)).max())
        if deviation > check_tol:
            raise DegenerateSystemError(
                f"Orthonormalized fiber Gramian deviates from identity by {deviation:.3e}",
                sigma=layout.torus.points[s].tolist(),
            )
    print(f"✅ Orthonormalized fibers at {layout.n_sigma} torus points (|Gamma_1|={n_gamma})", file=sys.stderr)
    return result


def scale_fibers(system: TranslateSystem, factors: Sequence[complex]) -> TranslateSystem:
    """Multiply the sigma-fiber of every generator by factors[sigma]"""
    factors = np.asarray(factors)
    if factors.shape != (system.layout.n_sigma,):
        raise LayoutMismatchError(f"Need one factor per torus point ({system.layout.n_sigma}), got {factors.shape}")
    return system.with_generators(
        [FiberField(phi.layout, factors[:, None, None, None] * phi.data) for phi in system.generators]
    )


def perturb_fiber_norm(system: TranslateSystem, sigma_index: int, norm: float,
                       generator: int = 0) -> TranslateSystem:
    """Rescale one sigma-fiber of one generator to the given L-norm"""
    phi = system.generators[generator]
    current = phi.fiber_norms()[sigma_index]
    if current == 0:
        raise ValueError(f"Fiber at sigma index {sigma_index} is zero and cannot be rescaled")
    data = phi.data.copy()
    data[sigma_index] *= norm / current
    generators = list(system.generators)
    generators[generator] = FiberField(phi.layout, data)
    return system.with_generators(generators)


def random_span_element(system: TranslateSystem, rng: np.random.Generator) -> FiberField:
    """Tf(sigma) = sum_i b_i(sigma) v_i(sigma) with complex Gaussian b"""
    layout = system.layout
    out = np.zeros((layout.n_sigma, layout.n_j, layout.D, layout.D), dtype=complex)
    for s in range(layout.n_sigma):
        stack = fiber_stack(s, system)
        b = rng.standard_normal(stack.shape[0]) + 1j * rng.standard_normal(stack.shape[0])
        out[s] = np.tensordot(b, stack, axes=1)
    return FiberField(layout, out)


def frame_ratio_probe(system: TranslateSystem, report: GramianReport,
                      which: Literal["lower", "upper"]) -> Tuple[FiberField, float]:
    """
    Span element concentrated on the extremal fiber eigenvector at the sigma
    attaining the essential lower or upper bound.

    Returns:
        (f, eigenvalue); frame_sum(f) / ||f||^2 equals the eigenvalue
    """
    if which == "lower" and report.mode == "bessel":
        raise ValueError("A bessel-mode report carries no lower bounds to probe")
    active = [(i, fb) for i, fb in enumerate(report.fibers) if fb.rank > 0]
    if which == "lower":
        s, _ = min(active, key=lambda item: item[1].lower)
    elif which == "upper":
        s, _ = max(active, key=lambda item: item[1].upper)
    else:
        raise ValueError(f"which must be 'lower' or 'upper', got '{which}'")

    layout = system.layout
    stack = fiber_stack(s, system)
    eigenvalues, eigenvectors = scipy.linalg.eigh(_gram(stack, layout.space.measure))
    if which == "upper":
        index = len(eigenvalues) - 1
    else:
        cutoff = report.rank_rel_tol * eigenvalues[-1]
        index = int(np.flatnonzero(eigenvalues > cutoff)[0])
    c = eigenvectors[:, index]

    out = np.zeros((layout.n_sigma, layout.n_j, layout.D, layout.D), dtype=complex)
    out[s] = np.tensordot(c, stack, axes=1)
    return FiberField(layout, out), float(eigenvalues[index])


# --- Range samples ---

@dataclass(frozen=True, eq=False)
class RangeSample:
    """Orthonormal basis of J(sigma), stored as a (rank, Nj, D, D) array"""

    layout: FieldLayout
    sigma_index: int
    basis_data: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.basis_data.shape[0])

    @property
    def sigma(self) -> np.ndarray:
        return self.layout.torus.points[self.sigma_index]

    @property
    def basis(self) -> List[FiberVector]:
        return [FiberVector(self.layout, self.sigma_index, b) for b in self.basis_data]


def _orthonormal_basis(stack: np.ndarray, measure: float, rank_rel_tol: float) -> np.ndarray:
    # pivoted Gram-Schmidt: largest residual first, ties to the lowest index
    n = stack.shape[0]
    flat = stack.reshape(n, -1).astype(complex)
    residual = flat.copy()
    norms = np.sqrt(measure * np.sum(np.abs(flat) ** 2, axis=1))
    reference = norms.max() if n else 0.0
    basis: List[np.ndarray] = []
    if reference == 0:
        return np.zeros((0,) + stack.shape[1:], dtype=complex)

    for _ in range(min(n, flat.shape[1])):
        res_norms = np.sqrt(measure * np.sum(np.abs(residual) ** 2, axis=1))
        pivot = int(np.argmax(res_norms))
        if res_norms[pivot] <= rank_rel_tol * reference:
            break
        b = residual[pivot] / res_norms[pivot]
        for e in basis:
            b = b - measure * np.vdot(e, b) * e
        b = b / np.sqrt(measure * np.vdot(b, b).real)
        basis.append(b)
        residual = residual - measure * (residual @ b.conj())[:, None] * b[None, :]
        residual[pivot] = 0

    if not basis:
        return np.zeros((0,) + stack.shape[1:], dtype=complex)
    return np.stack(basis).reshape((len(basis),) + stack.shape[1:])


def range_sample(sigma_index: int, system: TranslateSystem, rank_rel_tol: float = 1e-9) -> RangeSample:
    """Orthonormal basis of J(sigma) = span of the fiber system"""
    layout = system.layout
    basis = _orthonormal_basis(fiber_stack(sigma_index, system), layout.space.measure, rank_rel_tol)
    return RangeSample(layout, sigma_index, basis)


def _project_data(rs: RangeSample, data: np.ndarray) -> np.ndarray:
    if rs.rank == 0:
        return np.zeros_like(data)
    measure = rs.layout.space.measure
    B = rs.basis_data.reshape(rs.rank, -1)
    coefficients = measure * (B.conj() @ data.reshape(-1))
    return (coefficients @ B).reshape(data.shape)


def project(rs: RangeSample, h: FiberVector) -> FiberVector:
    """P_sigma h = sum_b <h, b> b"""
    check_same_layout(rs.layout, h.layout)
    if h.sigma_index != rs.sigma_index:
        raise LayoutMismatchError(f"Vector at sigma index {h.sigma_index}, range sample at {rs.sigma_index}")
    return FiberVector(h.layout, h.sigma_index, _project_data(rs, h.data))


def invariance_defect(rs: RangeSample, k: Sequence[int]) -> float:
    """max over basis b of ||(I - P_sigma) pi~_sigma(k) b||_L"""
    defect = 0.0
    for b in rs.basis:
        moved = fiber_action(k, b)
        defect = max(defect, (moved - project(rs, moved)).norm())
    return defect


@dataclass(frozen=True)
class MembershipResidual:
    residuals: Tuple[float, ...]
    max_residual: float


def membership_residual(f: FiberField, system: TranslateSystem, rank_rel_tol: float = 1e-9,
                        threads: int = 1) -> MembershipResidual:
    """||Tf(sigma) - P_sigma Tf(sigma)||_L at every sigma"""
    check_same_layout(f.layout, system.layout)

    def residual_at(s: int) -> float:
        rs = range_sample(s, system, rank_rel_tol)
        h = f.at(s)
        return (h - project(rs, h)).norm()

    residuals = tuple(map_ordered(residual_at, range(system.layout.n_sigma), threads))
    return MembershipResidual(residuals=residuals, max_residual=max(residuals))


def same_range(rs1: RangeSample, rs2: RangeSample) -> float:
    """
    Largest distance of a basis vector of either sample from the other
    sample's range; zero exactly when both describe the same J(sigma).
    """
    check_same_layout(rs1.layout, rs2.layout)
    if rs1.rank != rs2.rank:
        return float("inf")
    deviation = 0.0
    for a, b in ((rs1, rs2), (rs2, rs1)):
        for v in a.basis:
            deviation = max(deviation, (v - FiberVector(v.layout, v.sigma_index, _project_data(b, v.data))).norm())
    return deviation
