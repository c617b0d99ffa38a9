"""
Fourier-side operator fields and the transform T = A o M.

An OperatorField stores one operator per point of the lambda-grid l/S
(l running over [j_min*S, (j_max+1)*S - 1] on each axis, lexicographic).
periodize regroups that grid into fibers a(sigma) = (F(sigma + j))_j over the
torus grid sigma = s/S. Both orders are pure reshapes of one array, so the
round trip is exact.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import List, Literal, Sequence, Tuple

import numpy as np

from models import GeneratorSpec

from .errors import EmptyModelError, LayoutMismatchError
from .group import GroupSpec, pfaffian_many
from .space import GridSpace, indicator, rank_one

Measure = Literal["plancherel", "lebesgue"]


@dataclass(frozen=True)
class TorusGrid:
    """Sample points s/S, s in {0..S-1}^r, of the r-torus"""

    r: int
    S: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"Torus dimension must be at least 1, got r={self.r}")
        if self.S < 2:
            raise ValueError(f"Torus grid needs S >= 2 samples per axis, got S={self.S}")

    @property
    def size(self) -> int:
        return self.S ** self.r

    @cached_property
    def indices(self) -> np.ndarray:
        """(S^r, r) integer sample indices, lexicographic"""
        return np.array(list(itertools.product(range(self.S), repeat=self.r)), dtype=int)

    @cached_property
    def points(self) -> np.ndarray:
        return self.indices / self.S


@dataclass(frozen=True)
class FiberIndexSet:
    """The box of fiber indices j in prod [j_min_i, j_max_i]"""

    j_min: Tuple[int, ...]
    j_max: Tuple[int, ...]

    def __post_init__(self):
        if len(self.j_min) != len(self.j_max):
            raise ValueError(f"j_min {self.j_min} and j_max {self.j_max} differ in length")
        if any(lo > hi for lo, hi in zip(self.j_min, self.j_max)):
            raise ValueError(f"Empty fiber box: j_min={self.j_min}, j_max={self.j_max}")

    @classmethod
    def from_half_width(cls, r: int, j_half: int) -> "FiberIndexSet":
        return cls(j_min=(-j_half,) * r, j_max=(j_half - 1,) * r)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in zip(self.j_min, self.j_max))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def indices(self) -> np.ndarray:
        """(Nj, r) fiber indices, lexicographic"""
        ranges = [range(lo, hi + 1) for lo, hi in zip(self.j_min, self.j_max)]
        return np.array(list(itertools.product(*ranges)), dtype=int)


@dataclass(frozen=True)
class FieldLayout:
    """
    Shared discretization of a run: group, torus grid, fiber box, realization
    grid (with W = S) and the Pfaffian mask.
    """

    group: GroupSpec
    torus: TorusGrid
    fibers: FiberIndexSet
    space: GridSpace
    pf_eps: float = 1e-9

    def __post_init__(self):
        if self.torus.r != self.group.r or len(self.fibers.j_min) != self.group.r:
            raise LayoutMismatchError(
                f"Torus and fiber box must have r={self.group.r} axes for {self.group.name}"
            )
        if self.space.W != self.torus.S:
            raise LayoutMismatchError(
                f"Grid window W={self.space.W} must equal the torus resolution S={self.torus.S}"
            )
        if self.space.d != self.group.d:
            raise LayoutMismatchError(f"Grid has d={self.space.d}, {self.group.name} needs d={self.group.d}")
        if self.pf_eps <= 0:
            raise ValueError(f"pf_eps must be positive, got {self.pf_eps}")
        if not self.mask.any():
            raise EmptyModelError(
                f"Every (sigma, j) slot is masked: |Pf| < pf_eps={self.pf_eps} on the whole grid"
            )

    @property
    def r(self) -> int:
        return self.group.r

    @property
    def S(self) -> int:
        return self.torus.S

    @property
    def D(self) -> int:
        return self.space.dim

    @property
    def n_sigma(self) -> int:
        return self.torus.size

    @property
    def n_j(self) -> int:
        return self.fibers.size

    @property
    def n_lambda(self) -> int:
        return self.n_sigma * self.n_j

    @cached_property
    def lambda_indices(self) -> np.ndarray:
        """(L, r) integers l with lambda = l/S, lexicographic in lambda"""
        ranges = [range(lo * self.S, (hi + 1) * self.S) for lo, hi in zip(self.fibers.j_min, self.fibers.j_max)]
        return np.array(list(itertools.product(*ranges)), dtype=int)

    @cached_property
    def lambdas(self) -> np.ndarray:
        return self.lambda_indices / self.S

    @cached_property
    def fiber_lambdas(self) -> np.ndarray:
        """(S^r, Nj, r) array of lambda = sigma + j"""
        return self.torus.points[:, None, :] + self.fibers.indices[None, :, :]

    @cached_property
    def pf(self) -> np.ndarray:
        """|Pf| on the lambda grid"""
        return pfaffian_many(self.group, self.lambdas)

    @cached_property
    def mask(self) -> np.ndarray:
        """True where the lambda-grid slot is kept"""
        return self.pf >= self.pf_eps

    @cached_property
    def fiber_mask(self) -> np.ndarray:
        """(S^r, Nj) mask in fiber order"""
        return to_fiber_order(self, self.mask)

    def describe(self) -> str:
        return (
            f"{self.group.name}: r={self.r}, d={self.group.d}, S={self.S}, q={self.space.q}, "
            f"j in [{list(self.fibers.j_min)}, {list(self.fibers.j_max)}], "
            f"{int((~self.mask).sum())}/{self.n_lambda} slots masked"
        )


def make_layout(group: GroupSpec, S: int, q: int, j_half: int, pf_eps: float = 1e-9) -> FieldLayout:
    """
    Build the layout of a run.

    Args:
        group: group preset
        S: torus samples per axis (also the grid window W)
        q: realization grid samples per axis, a multiple of S
        j_half: fiber box half width, j in [-j_half, j_half - 1]
        pf_eps: Pfaffian mask threshold

    Returns:
        FieldLayout, or raises EmptyModelError when every slot is masked
    """
    return FieldLayout(
        group=group,
        torus=TorusGrid(r=group.r, S=S),
        fibers=FiberIndexSet.from_half_width(group.r, j_half),
        space=GridSpace(d=group.d, W=S, q=q),
        pf_eps=pf_eps,
    )


def to_fiber_order(layout: FieldLayout, values: np.ndarray) -> np.ndarray:
    """Reindex a (L, ...) lambda-grid array into (S^r, Nj, ...) fiber order"""
    r, S = layout.r, layout.S
    tail = values.shape[1:]
    split = tuple(itertools.chain.from_iterable((J, S) for J in layout.fibers.shape))
    grid = values.reshape(split + tail)
    order = [2 * i + 1 for i in range(r)] + [2 * i for i in range(r)]
    order += list(range(2 * r, 2 * r + len(tail)))
    return grid.transpose(order).reshape((layout.n_sigma, layout.n_j) + tail)


def to_lambda_order(layout: FieldLayout, values: np.ndarray) -> np.ndarray:
    """Inverse of to_fiber_order"""
    r, S = layout.r, layout.S
    tail = values.shape[2:]
    grid = values.reshape((S,) * r + layout.fibers.shape + tail)
    order = list(itertools.chain.from_iterable((r + i, i) for i in range(r)))
    order += list(range(2 * r, 2 * r + len(tail)))
    return grid.transpose(order).reshape((layout.n_lambda,) + tail)


@dataclass(frozen=True, eq=False)
class OperatorField:
    """
    lambda -> F(lambda) in HS(L^2(R^d)) on the lambda grid.

    measure is "plancherel" for Fourier-side inputs (norm weighted by |Pf|)
    and "lebesgue" after the Pfaffian weighting M.
    """

    layout: FieldLayout
    data: np.ndarray
    measure: Measure = "plancherel"

    def __post_init__(self):
        expected = (self.layout.n_lambda, self.layout.D, self.layout.D)
        if self.data.shape != expected:
            raise LayoutMismatchError(f"Field data has shape {self.data.shape}, expected {expected}")
        if self.measure not in ("plancherel", "lebesgue"):
            raise ValueError(f"Unknown field measure '{self.measure}'")

    @classmethod
    def from_array(cls, layout: FieldLayout, data: np.ndarray, measure: Measure = "plancherel") -> "OperatorField":
        """Copy data into a field, zeroing masked slots"""
        data = np.array(data, dtype=complex)
        if not np.all(np.isfinite(data)):
            raise ValueError("Field data contains NaN or Inf entries")
        data[~layout.mask] = 0
        return cls(layout=layout, data=data, measure=measure)

    @classmethod
    def zeros(cls, layout: FieldLayout, measure: Measure = "plancherel") -> "OperatorField":
        return cls(layout, np.zeros((layout.n_lambda, layout.D, layout.D), dtype=complex), measure)


@dataclass(frozen=True, eq=False)
class FiberVector:
    """An element a(sigma) of l^2(Z^r, HS), one operator per fiber index"""

    layout: FieldLayout
    sigma_index: int
    data: np.ndarray

    def __post_init__(self):
        expected = (self.layout.n_j, self.layout.D, self.layout.D)
        if self.data.shape != expected:
            raise LayoutMismatchError(f"Fiber vector has shape {self.data.shape}, expected {expected}")

    @property
    def sigma(self) -> np.ndarray:
        return self.layout.torus.points[self.sigma_index]

    def __add__(self, other: "FiberVector") -> "FiberVector":
        _check_same_fiber(self, other)
        return FiberVector(self.layout, self.sigma_index, self.data + other.data)

    def __sub__(self, other: "FiberVector") -> "FiberVector":
        _check_same_fiber(self, other)
        return FiberVector(self.layout, self.sigma_index, self.data - other.data)

    def scaled(self, factor: complex) -> "FiberVector":
        return FiberVector(self.layout, self.sigma_index, factor * self.data)

    def norm(self) -> float:
        return float(np.sqrt(max(fiber_inner(self, self).real, 0.0)))


@dataclass(frozen=True, eq=False)
class FiberField:
    """sigma -> a(sigma), stored as a (S^r, Nj, D, D) array"""

    layout: FieldLayout
    data: np.ndarray

    def __post_init__(self):
        L = self.layout
        expected = (L.n_sigma, L.n_j, L.D, L.D)
        if self.data.shape != expected:
            raise LayoutMismatchError(f"Fiber field has shape {self.data.shape}, expected {expected}")

    def at(self, sigma_index: int) -> FiberVector:
        return FiberVector(self.layout, sigma_index, self.data[sigma_index])

    def fiber_norms(self) -> np.ndarray:
        """||a(sigma)||_L for every sigma"""
        sq = self.layout.space.measure * np.sum(np.abs(self.data) ** 2, axis=(1, 2, 3))
        return np.sqrt(sq)

    def __add__(self, other: "FiberField") -> "FiberField":
        check_same_layout(self.layout, other.layout)
        return FiberField(self.layout, self.data + other.data)

    def scaled(self, factor: complex) -> "FiberField":
        return FiberField(self.layout, factor * self.data)

    @classmethod
    def zeros(cls, layout: FieldLayout) -> "FiberField":
        return cls(layout, np.zeros((layout.n_sigma, layout.n_j, layout.D, layout.D), dtype=complex))


def check_same_layout(a: FieldLayout, b: FieldLayout):
    if a is not b and a != b:
        raise LayoutMismatchError(f"Layouts differ: {a.describe()} vs {b.describe()}")


def _check_same_fiber(a: FiberVector, b: FiberVector):
    check_same_layout(a.layout, b.layout)
    if a.sigma_index != b.sigma_index:
        raise LayoutMismatchError(f"Fiber vectors live at different sigma: {a.sigma_index} vs {b.sigma_index}")


# --- M, A, T ---

def weight(field: OperatorField) -> OperatorField:
    """M: multiply every kept slot by |Pf(lambda)|^(1/2)"""
    if field.measure != "plancherel":
        raise ValueError("weight expects a Plancherel-measure field; this field is already weighted")
    factors = np.where(field.layout.mask, np.sqrt(field.layout.pf), 0.0)
    return OperatorField(field.layout, field.data * factors[:, None, None], measure="lebesgue")


def periodize(field: OperatorField) -> FiberField:
    """A: regroup the lambda grid into fibers a(sigma)_j = F(sigma + j)"""
    return FiberField(field.layout, to_fiber_order(field.layout, field.data))


def deperiodize(ff: FiberField, layout: FieldLayout, measure: Measure = "lebesgue") -> OperatorField:
    check_same_layout(ff.layout, layout)
    return OperatorField(layout, to_lambda_order(layout, ff.data), measure=measure)


def t_transform(field: OperatorField) -> FiberField:
    """T = A o M (the Fourier transform is absorbed in the Fourier-side input)"""
    return periodize(weight(field))


# --- Norms and inner products ---

def field_norm(field: OperatorField) -> float:
    """
    L^2 norm of a field under its own measure:
    S^-r sum ||F(lambda)||_HS^2 |Pf(lambda)| (plancherel) or without the |Pf| factor (lebesgue).
    """
    layout = field.layout
    hs_sq = layout.space.measure * np.sum(np.abs(field.data) ** 2, axis=(1, 2))
    if field.measure == "plancherel":
        hs_sq = np.where(layout.mask, hs_sq * layout.pf, 0.0)
    return float(np.sqrt(np.sum(hs_sq) / layout.S ** layout.r))


def fiber_norm(ff: FiberField) -> float:
    norms = ff.fiber_norms()
    return float(np.sqrt(np.sum(norms ** 2) / ff.layout.S ** ff.layout.r))


def fiber_inner(a: FiberVector, b: FiberVector) -> complex:
    """<a, b>_L = sum_j <a_j, b_j>_HS, linear in a"""
    _check_same_fiber(a, b)
    return complex(np.vdot(b.data, a.data)) * a.layout.space.measure


def field_inner(a: FiberField, b: FiberField) -> complex:
    """<a, b> = S^-r sum_sigma <a(sigma), b(sigma)>_L"""
    check_same_layout(a.layout, b.layout)
    L = a.layout
    return complex(np.vdot(b.data, a.data)) * L.space.measure / L.S ** L.r


# --- Generators ---

def _gaussian(layout: FieldLayout, spec: GeneratorSpec) -> np.ndarray:
    space = layout.space
    center = spec.center if spec.center is not None else [space.W / 2] * space.d
    if len(center) != space.d:
        raise LayoutMismatchError(f"Gaussian center has {len(center)} coordinates, grid has d={space.d}")
    if space.d == 0:
        u = np.ones(1, dtype=complex)
    else:
        dist_sq = np.sum((space.points - np.asarray(center)) ** 2, axis=1)
        u = np.exp(-dist_sq / (2 * spec.width ** 2)).astype(complex)
    envelope = np.exp(-np.sum(layout.lambdas ** 2, axis=1) / 2)
    return envelope[:, None, None] * rank_one(space, u, u)[None]


def _indicator(layout: FieldLayout, spec: GeneratorSpec) -> np.ndarray:
    space = layout.space
    op = rank_one(space, indicator(space, spec.box_u), indicator(space, spec.box_v))
    return np.broadcast_to(op, (layout.n_lambda, layout.D, layout.D)).copy()


def _random(layout: FieldLayout, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    shape = (layout.n_lambda, layout.D, layout.D)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return noise / (layout.D * np.sqrt(2 * layout.space.measure))


def _bspline(layout: FieldLayout, spec: GeneratorSpec) -> np.ndarray:
    space = layout.space
    u0 = indicator(space, [[0.0, 1.0]] * space.d)
    profile = np.prod(np.sinc(layout.lambdas) ** spec.order, axis=1)
    return profile[:, None, None] * rank_one(space, u0, u0)[None]


def build_generator(spec: GeneratorSpec, layout: FieldLayout, default_seed: int = 0) -> OperatorField:
    """
    Build the Fourier-side field of one generator.

    Args:
        spec: generator preset and parameters
        layout: run layout
        default_seed: seed used when the spec does not carry its own

    Returns:
        Plancherel-measure OperatorField with masked slots zeroed
    """
    seed = spec.seed if spec.seed is not None else default_seed
    if spec.kind == "gaussian-rank-one":
        data = _gaussian(layout, spec)
    elif spec.kind == "indicator-rank-one":
        data = _indicator(layout, spec)
    elif spec.kind == "random":
        data = _random(layout, seed)
    elif spec.kind == "bandlimited-random":
        if layout.r != 1:
            raise ValueError(f"bandlimited-random needs a one-dimensional center, {layout.group.name} has r={layout.r}")
        data = _random(layout, seed)
        j = layout.lambda_indices[:, 0] // layout.S
        data[(j < -1) | (j > 0)] = 0
    elif spec.kind == "bspline":
        data = _bspline(layout, spec)
    elif spec.kind == "file":
        from .field_io import read_field

        data = read_field(spec.path, layout).data.copy()
    else:
        raise ValueError(f"Unknown generator kind '{spec.kind}'")

    if spec.support == "diagonal":
        if layout.r != 2:
            raise ValueError(f"Diagonal support needs r=2, {layout.group.name} has r={layout.r}")
        j = layout.lambda_indices // layout.S
        data[j[:, 0] != j[:, 1]] = 0

    return OperatorField.from_array(layout, data)


def random_field(layout: FieldLayout, rng: np.random.Generator) -> OperatorField:
    """Random Plancherel field with Gaussian entries drawn from rng"""
    shape = (layout.n_lambda, layout.D, layout.D)
    data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return OperatorField.from_array(layout, data)


def slot_index(layout: FieldLayout, j: Sequence[int]) -> int:
    """Position of fiber index j in the fiber box"""
    matches = np.flatnonzero(np.all(layout.fibers.indices == np.asarray(j), axis=1))
    if matches.size == 0:
        raise LayoutMismatchError(f"Fiber index {list(j)} is outside the box")
    return int(matches[0])


def masked_slots(layout: FieldLayout) -> List[Tuple[int, int]]:
    """(sigma_index, j_index) pairs that are masked, in fiber order"""
    rows, cols = np.nonzero(~layout.fiber_mask)
    return list(zip(rows.tolist(), cols.tolist()))
