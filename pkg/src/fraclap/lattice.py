"""Box domains, node-centered lattice grids and grid functions.

Unknowns live on interior nodes only. A grid function is understood to be
extended by zero outside its box, which is how the exterior Dirichlet
condition enters every operator in the package.

Flattening is row-major over axes (axis 0 outermost), so on a product grid
``x`` varies slowest and ``t`` fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class GridMismatchError(ValueError):
    """Raised when grid functions or forms live on incompatible grids."""


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``prod_i (lo[i], hi[i])``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(a) for a in np.atleast_1d(self.lo))
        hi = tuple(float(b) for b in np.atleast_1d(self.hi))
        if len(lo) == 0 or len(lo) != len(hi):
            raise ValueError(f"lo/hi must be non-empty and of equal length, got {lo}, {hi}")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError(f"need lo < hi on every axis, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def scaled(self, factors: Sequence[float]) -> "BoxDomain":
        """Box with every axis multiplied about the origin by ``factors``."""
        f = np.broadcast_to(np.asarray(factors, dtype=float), (self.dim,))
        if np.any(f <= 0):
            raise ValueError("scale factors must be positive")
        return BoxDomain(tuple(a * c for a, c in zip(self.lo, f)), tuple(b * c for b, c in zip(self.hi, f)))


def interval(a: float, b: float) -> BoxDomain:
    return BoxDomain((a,), (b,))


@dataclass(frozen=True)
class LatticeGrid:
    """Uniform node-centered grid with ``nodes_per_axis[i]`` interior nodes.

    Interior node ``j`` on axis ``i`` sits at ``lo[i] + (j + 1) * h[i]`` with
    ``h[i] = (hi[i] - lo[i]) / (N[i] + 1)``; boundary nodes are not unknowns.
    """

    domain: BoxDomain
    nodes_per_axis: tuple[int, ...]
    spacing: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        n = tuple(int(k) for k in np.atleast_1d(self.nodes_per_axis))
        if len(n) != self.domain.dim:
            raise ValueError(f"{len(n)} node counts for a {self.domain.dim}-d domain")
        if any(k < 1 for k in n):
            raise ValueError(f"node counts must be positive, got {n}")
        object.__setattr__(self, "nodes_per_axis", n)
        h = tuple(L / (k + 1) for L, k in zip(self.domain.lengths, n))
        object.__setattr__(self, "spacing", h)

    @classmethod
    def from_spacing(cls, domain: BoxDomain, spacing: Sequence[float] | float) -> "LatticeGrid":
        """Grid whose spacing divides every box length; raises if it does not."""
        h = np.broadcast_to(np.asarray(spacing, dtype=float), (domain.dim,))
        counts = []
        for L, hi in zip(domain.lengths, h):
            cells = L / hi
            k = int(round(cells))
            if k < 2 or abs(cells - k) > 1e-9 * cells:
                raise ValueError(f"spacing {hi} does not divide length {L} into >= 2 cells")
            counts.append(k - 1)
        return cls(domain, tuple(counts))

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.nodes_per_axis

    @property
    def size(self) -> int:
        return int(np.prod(self.nodes_per_axis))

    @property
    def cell_volume(self) -> float:
        """Quadrature weight ``prod_i h_i`` of one node."""
        return float(np.prod(self.spacing))

    @property
    def discrete_volume(self) -> float:
        """Total node mass ``size * cell_volume`` (slightly below the box volume)."""
        return self.size * self.cell_volume

    def axis_mass(self, axis: int = -1) -> float:
        """Node mass ``N_i * h_i`` along one axis, the discrete length of that factor."""
        return self.nodes_per_axis[axis] * self.spacing[axis]

    def coords(self, axis: int = 0) -> np.ndarray:
        lo, h, n = self.domain.lo[axis], self.spacing[axis], self.nodes_per_axis[axis]
        return lo + h * np.arange(1, n + 1)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*(self.coords(i) for i in range(self.dim)), indexing="ij")

    def axis_grid(self, axis: int) -> "LatticeGrid":
        """One-dimensional factor grid along ``axis``."""
        d = self.domain
        return LatticeGrid(BoxDomain((d.lo[axis],), (d.hi[axis],)), (self.nodes_per_axis[axis],))

    def scaled(self, factors: Sequence[float] | float) -> "LatticeGrid":
        """Congruent grid on the scaled box: same node counts, spacing times ``factors``."""
        return LatticeGrid(self.domain.scaled(np.broadcast_to(factors, (self.dim,))), self.nodes_per_axis)


def interval_grid(a: float, b: float, n: int) -> LatticeGrid:
    return LatticeGrid(interval(a, b), (n,))


def product_grid(gx: LatticeGrid, gt: LatticeGrid) -> LatticeGrid:
    """Tensor grid over ``gx.domain x gt.domain``; ordering is x-major then t."""
    dom = BoxDomain(gx.domain.lo + gt.domain.lo, gx.domain.hi + gt.domain.hi)
    return LatticeGrid(dom, gx.nodes_per_axis + gt.nodes_per_axis)


class GridFunction:
    """Real values on the interior nodes of a grid, zero outside the box.

    The value array is copied and frozen, so instances are safe to share.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: LatticeGrid, values):
        v = np.array(values, dtype=float).reshape(-1)
        if v.size != grid.size:
            raise GridMismatchError(f"{v.size} values for a grid with {grid.size} nodes")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    @classmethod
    def zeros(cls, grid: LatticeGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def constant(cls, grid: LatticeGrid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(c)))

    @classmethod
    def sample(cls, grid: LatticeGrid, func: Callable[..., np.ndarray]) -> "GridFunction":
        """Evaluate ``func(*coords)`` on the interior nodes."""
        return cls(grid, np.broadcast_to(func(*grid.mesh()), grid.shape))

    @property
    def array(self) -> np.ndarray:
        """Values reshaped to ``grid.shape`` (read-only view)."""
        return self.values.reshape(self.grid.shape)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridMismatchError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, self.values / float(c))

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def __repr__(self):
        return f"GridFunction(shape={self.grid.shape}, max={np.abs(self.values).max():.3g})"


def l2_inner(u: GridFunction, v: GridFunction) -> float:
    """Discrete L2 pairing ``sum_j u_j v_j * prod_i h_i``."""
    if u.grid != v.grid:
        raise GridMismatchError("l2_inner of functions on different grids")
    return float(np.dot(u.values, v.values)) * u.grid.cell_volume


def l2_norm(u: GridFunction) -> float:
    return float(np.sqrt(l2_inner(u, u)))
