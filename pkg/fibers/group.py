"""
Group presets
Dimensions, group laws, Pfaffians, lattice enumeration and the discretized
irreducible representations pi_lambda of the supported SI/Z nilpotent groups.

Coordinates of a group element are (x, z): x holds the d translation
coordinates followed by the d modulation coordinates, z the r central ones.
"""

import itertools
import re
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import LayoutMismatchError, UnsupportedGroupError
from .space import GridSpace, Operator

PRESET_NAMES = ("abelian(r)", "heisenberg3", "twostep6", "threestep5")

_ABELIAN_PATTERN = re.compile(r"^abelian\((\d+)\)$")


@dataclass(frozen=True)
class GroupSpec:
    """
    A group preset.

    Attributes:
        name: preset name ("heisenberg3", "twostep6", "threestep5" or "abelian(r)")
        r: dimension of the center
        d: half the dimension of a generic coadjoint orbit (n = r + 2d)
        has_group_law: whether multiply is available for this preset
    """

    name: str
    r: int
    d: int
    has_group_law: bool

    @property
    def family(self) -> str:
        """Preset family, "abelian" for every abelian(r)"""
        return "abelian" if self.name.startswith("abelian") else self.name

    @property
    def n(self) -> int:
        return self.r + 2 * self.d


@dataclass(frozen=True)
class GroupElement:
    x: Tuple[float, ...]
    z: Tuple[float, ...]

    @property
    def translation(self) -> Tuple[float, ...]:
        return self.x[: len(self.x) // 2]

    @property
    def modulation(self) -> Tuple[float, ...]:
        return self.x[len(self.x) // 2:]


@dataclass(frozen=True)
class LatticePoint:
    """A lattice element gamma = (k, m) with k in Gamma_1 and m in Gamma_0"""

    k: Tuple[int, ...]
    m: Tuple[int, ...]

    def element(self) -> GroupElement:
        return GroupElement(
            x=tuple(float(v) for v in self.k),
            z=tuple(float(v) for v in self.m),
        )


def preset(name: str) -> GroupSpec:
    """
    Look up a group preset by name.

    Args:
        name: one of heisenberg3, twostep6, threestep5 or abelian(r) with r >= 1

    Returns:
        GroupSpec with the preset's dimensions
    """
    name = name.strip()
    match = _ABELIAN_PATTERN.match(name)
    if match:
        r = int(match.group(1))
        if r < 1:
            raise ValueError(f"abelian(r) needs r >= 1, got r={r}")
        return GroupSpec(name=f"abelian({r})", r=r, d=0, has_group_law=True)
    if name == "heisenberg3":
        return GroupSpec(name=name, r=1, d=1, has_group_law=True)
    if name == "twostep6":
        return GroupSpec(name=name, r=2, d=2, has_group_law=True)
    if name == "threestep5":
        return GroupSpec(name=name, r=1, d=2, has_group_law=False)
    raise ValueError(f"Unknown group preset '{name}'. Available: {', '.join(PRESET_NAMES)}")


def identity(spec: GroupSpec) -> GroupElement:
    return GroupElement(x=(0.0,) * (2 * spec.d), z=(0.0,) * spec.r)


def _check_element(spec: GroupSpec, g: GroupElement):
    if len(g.x) != 2 * spec.d or len(g.z) != spec.r:
        raise LayoutMismatchError(
            f"Element with |x|={len(g.x)}, |z|={len(g.z)} does not belong to {spec.name} "
            f"(expects |x|={2 * spec.d}, |z|={spec.r})"
        )


def twostep6_matrix(g: GroupElement) -> np.ndarray:
    """
    7x7 unipotent matrix realization of a twostep6 element.
    The corner entries carry 2z1 - x1y1 - x2y2 (row 0) and 2z2 - x1y2 - x2y1 (row 1).
    """
    x1, x2, y1, y2 = g.x
    z1, z2 = g.z
    M = np.eye(7)
    M[0, 2:6] = [x2, x1, -y2, -y1]
    M[1, 2:6] = [x1, x2, -y1, -y2]
    M[2:6, 6] = [y2, y1, x2, x1]
    M[0, 6] = 2 * z1 - x1 * y1 - x2 * y2
    M[1, 6] = 2 * z2 - x1 * y2 - x2 * y1
    return M


def twostep6_from_matrix(M: np.ndarray) -> GroupElement:
    """Read twostep6 coordinates back from the 7x7 realization"""
    y2, y1, x2, x1 = M[2:6, 6]
    z1 = (M[0, 6] + x1 * y1 + x2 * y2) / 2
    z2 = (M[1, 6] + x1 * y2 + x2 * y1) / 2
    return GroupElement(
        x=(float(x1), float(x2), float(y1), float(y2)),
        z=(float(z1), float(z2)),
    )


def multiply(spec: GroupSpec, a: GroupElement, b: GroupElement) -> GroupElement:
    """Group product a*b in exponential coordinates"""
    if not spec.has_group_law:
        raise UnsupportedGroupError(f"No group law is available for {spec.name}")
    _check_element(spec, a)
    _check_element(spec, b)

    if spec.family == "abelian":
        return GroupElement(x=(), z=tuple(za + zb for za, zb in zip(a.z, b.z)))

    if spec.family == "heisenberg3":
        xa, ya = a.x
        xb, yb = b.x
        return GroupElement(x=(xa + xb, ya + yb), z=(a.z[0] + b.z[0] + xa * yb,))

    return twostep6_from_matrix(twostep6_matrix(a) @ twostep6_matrix(b))


def add_coordinates(a: GroupElement, b: GroupElement) -> GroupElement:
    """Coordinatewise sum a + b (the reference point for cocycle phases)"""
    return GroupElement(
        x=tuple(u + v for u, v in zip(a.x, b.x)),
        z=tuple(u + v for u, v in zip(a.z, b.z)),
    )


def pfaffian_many(spec: GroupSpec, lambdas: np.ndarray) -> np.ndarray:
    """|Pf(lambda)| for an (n, r) array of lambdas"""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 2 or lambdas.shape[1] != spec.r:
        raise LayoutMismatchError(f"Expected lambdas of shape (n, {spec.r}), got {lambdas.shape}")
    if spec.family == "abelian":
        return np.ones(lambdas.shape[0])
    if spec.family == "heisenberg3":
        return np.abs(lambdas[:, 0])
    if spec.family == "twostep6":
        return np.abs(lambdas[:, 0] ** 2 - lambdas[:, 1] ** 2)
    return lambdas[:, 0] ** 2


def pfaffian(spec: GroupSpec, lam: Sequence[float]) -> float:
    """
    Modulus of the Pfaffian, i.e. the Plancherel density at lambda.

    Args:
        spec: group preset
        lam: central frequency, length r

    Returns:
        |Pf(lambda)| (zero on the Pfaffian zero set; callers mask it)
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (spec.r,):
        raise LayoutMismatchError(f"lambda has length {lam.size}, {spec.name} needs r={spec.r}")
    return float(pfaffian_many(spec, lam[None, :])[0])


def lattice_gamma1(spec: GroupSpec, radius: int) -> List[Tuple[int, ...]]:
    """All k in Z^(2d) with max-norm at most radius, in lexicographic order"""
    if radius < 0:
        raise ValueError(f"Lattice radius must be non-negative, got {radius}")
    return list(itertools.product(range(-radius, radius + 1), repeat=2 * spec.d))


def _modulation_phases(spec: GroupSpec, points: np.ndarray, lambdas: np.ndarray,
                       y: np.ndarray) -> np.ndarray:
    # (n, D) array of modulation phases at the grid points
    if spec.family == "heisenberg3":
        return -2 * np.pi * lambdas[:, [0]] * y[0] * points[None, :, 0]
    if spec.family == "twostep6":
        lam1, lam2 = lambdas[:, 0], lambdas[:, 1]
        my = np.stack([lam1 * y[0] + lam2 * y[1], lam2 * y[0] + lam1 * y[1]], axis=1)
        return -2 * np.pi * my @ points.T
    # threestep5 chirp
    s1 = points[None, :, 0]
    s2 = points[None, :, 1]
    lam = lambdas[:, [0]]
    return np.pi * lam * (s1 ** 2 * y[0] - 2 * s1 * y[1]) - 2 * np.pi * lam * s2 * y[0]


def _roll_rows(space: GridSpace, H: np.ndarray, shifts: Tuple[int, ...]) -> np.ndarray:
    if not any(shifts):
        return H
    n, D, cols = H.shape
    grid = H.reshape((n,) + (space.q,) * space.d + (cols,))
    rolled = np.roll(grid, shift=shifts, axis=tuple(range(1, space.d + 1)))
    return rolled.reshape(n, D, cols)


def rep_apply(spec: GroupSpec, space: GridSpace, lambdas: np.ndarray,
              g: GroupElement, H: np.ndarray) -> np.ndarray:
    """
    Apply pi_lambda(g) to a stack of operators, one lambda per operator.

    Args:
        spec: group preset
        space: grid model of L^2(R^d), space.d must equal spec.d
        lambdas: (n, r) central frequencies
        g: group element whose translation part lies on the grid
        H: (n, D, D) operators

    Returns:
        (n, D, D) array with pi_lambda_i(g) @ H_i in slot i
    """
    _check_element(spec, g)
    if space.d != spec.d:
        raise LayoutMismatchError(f"Grid has d={space.d}, {spec.name} acts on d={spec.d}")
    lambdas = np.asarray(lambdas, dtype=float).reshape(-1, spec.r)
    H = np.asarray(H, dtype=complex)
    if H.ndim != 3 or H.shape[0] != lambdas.shape[0] or H.shape[1] != space.dim:
        raise LayoutMismatchError(
            f"Operator stack of shape {H.shape} does not match {lambdas.shape[0]} lambdas "
            f"on a grid of dimension {space.dim}"
        )

    character = np.exp(2j * np.pi * lambdas @ np.asarray(g.z, dtype=float))
    if spec.d == 0:
        return character[:, None, None] * H

    shifts = space.shift_samples(g.translation)
    y = np.asarray(g.modulation, dtype=float)
    modulation = np.exp(1j * _modulation_phases(spec, space.points, lambdas, y))

    if spec.family == "threestep5":
        out = _roll_rows(space, modulation[:, :, None] * H, shifts)
    else:
        out = modulation[:, :, None] * _roll_rows(space, H, shifts)
    return character[:, None, None] * out


def rep_matrix(spec: GroupSpec, space: GridSpace, lam: Sequence[float],
               g: GroupElement) -> Operator:
    """Unitary q^d x q^d matrix implementing pi_lambda(g) on the periodic grid"""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (spec.r,):
        raise LayoutMismatchError(f"lambda has length {lam.size}, {spec.name} needs r={spec.r}")
    return rep_apply(spec, space, lam[None, :], g, space.identity()[None])[0]
