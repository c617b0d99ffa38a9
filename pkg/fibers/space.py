"""
Discrete model of L^2(R^d) and of the Hilbert-Schmidt space HS(L^2(R^d)).

L^2(R^d) is modelled by a periodic grid of q samples per axis over a window
of length W; operators are dense complex q^d x q^d matrices. The grid measure
spacing^d is part of every inner product so that all modules share one
normalization.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from .errors import LayoutMismatchError

# Dense complex q^d x q^d matrix
Operator = np.ndarray


@dataclass(frozen=True)
class GridSpace:
    """
    Periodic sample grid standing in for L^2(R^d).

    Attributes:
        d: number of axes (0 gives the one-dimensional space of scalars)
        W: window length per axis
        q: samples per axis, a multiple of W so unit shifts are exact
    """

    d: int
    W: int
    q: int

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"Grid dimension must be non-negative, got d={self.d}")
        if self.W < 1 or self.q < 1:
            raise ValueError(f"Window and sample count must be positive, got W={self.W}, q={self.q}")
        if self.q % self.W != 0:
            raise ValueError(f"Samples per axis q={self.q} must be a multiple of the window W={self.W}")

    @property
    def spacing(self) -> float:
        return self.W / self.q

    @property
    def dim(self) -> int:
        """Dimension of the model space, q^d (1 when d=0)"""
        return self.q ** self.d

    @property
    def measure(self) -> float:
        """Grid cell volume spacing^d"""
        return self.spacing ** self.d

    @property
    def samples_per_unit(self) -> int:
        return self.q // self.W

    @cached_property
    def points(self) -> np.ndarray:
        """Grid coordinates, shape (q^d, d), row-major over axes"""
        if self.d == 0:
            return np.zeros((1, 0))
        axis = np.arange(self.q) * self.spacing
        mesh = np.meshgrid(*([axis] * self.d), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def shift_samples(self, x: Sequence[float]) -> Tuple[int, ...]:
        """
        Number of samples a translation by x moves along each axis.
        Raises ValueError when x is not on the grid.
        """
        if len(x) != self.d:
            raise LayoutMismatchError(f"Translation has {len(x)} coordinates, grid has d={self.d}")
        shifts = []
        for coordinate in x:
            exact = coordinate / self.spacing
            rounded = int(round(exact))
            if abs(exact - rounded) > 1e-9:
                raise ValueError(
                    f"Translation {list(x)} is off the grid (spacing {self.spacing}); "
                    f"coordinates must be integer multiples of the spacing"
                )
            shifts.append(rounded)
        return tuple(shifts)

    def identity(self) -> Operator:
        return np.eye(self.dim, dtype=complex)


def _check_operator(space: GridSpace, A: Operator, name: str):
    if A.shape != (space.dim, space.dim):
        raise LayoutMismatchError(
            f"Operator {name} has shape {A.shape}, expected {(space.dim, space.dim)}"
        )


def hs_inner(space: GridSpace, A: Operator, B: Operator) -> complex:
    """Hilbert-Schmidt pairing trace(B* A) * spacing^d"""
    _check_operator(space, A, "A")
    _check_operator(space, B, "B")
    return complex(np.vdot(B, A)) * space.measure


def hs_norm(space: GridSpace, A: Operator) -> float:
    return float(np.sqrt(max(hs_inner(space, A, A).real, 0.0)))


def grid_norm(space: GridSpace, u: np.ndarray) -> float:
    """L^2 norm of a grid function, sqrt(spacing^d * sum |u|^2)"""
    u = np.asarray(u)
    if u.shape != (space.dim,):
        raise LayoutMismatchError(f"Grid vector has shape {u.shape}, expected {(space.dim,)}")
    return float(np.sqrt(space.measure * np.vdot(u, u).real))


def rank_one(space: GridSpace, u: np.ndarray, v: np.ndarray) -> Operator:
    """
    The operator u (x) v*, scaled by spacing^(d/2) so that its HS norm is
    grid_norm(u) * grid_norm(v). On a unit-spacing grid this is plain u v*.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != (space.dim,) or v.shape != (space.dim,):
        raise LayoutMismatchError(
            f"rank_one needs vectors of length {space.dim}, got {u.shape} and {v.shape}"
        )
    return np.sqrt(space.measure) * np.outer(u, v.conj())


def indicator(space: GridSpace, box: Sequence[Sequence[float]]) -> np.ndarray:
    """
    Grid samples of the indicator of a half-open box prod [a_i, b_i).
    For d=0 the space of scalars has the single sample 1.
    """
    if space.d == 0:
        return np.ones(1, dtype=complex)
    if len(box) != space.d:
        raise LayoutMismatchError(f"Box has {len(box)} intervals, grid has d={space.d}")
    inside = np.ones(space.dim, dtype=bool)
    for axis, (low, high) in enumerate(box):
        t = space.points[:, axis]
        inside &= (t >= low - 1e-12) & (t < high - 1e-12)
    return inside.astype(complex)
