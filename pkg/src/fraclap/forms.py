"""Quadratic forms of the lattice fractional Laplacian on box grids.

A form with stencil weights ``w`` acts on a zero-extended grid function as the
Toeplitz operator ``(T u)_j = sum_k w_{k - j} u_k`` over interior nodes, and its
energy is ``prod(h) * u . T u``. Four kinds share this contract:

``full``
    the ``d``-dimensional stencil on the whole grid;
``tensor``
    ``T_x (x) I + I (x) T_t``, the split energy built from factor stencils;
``slice_x`` / ``slice_t``
    one summand of the split energy, i.e. the slice energies integrated over
    the transverse variable.

The last axis plays the role of ``t``; all other axes are ``x``.
"""

from __future__ import annotations

import numpy as np
from scipy import fft

from .lattice import GridFunction, GridMismatchError, LatticeGrid
from .weights import FractionalOrder, WeightStencil, as_order, compute_weights

KINDS = ("full", "tensor", "slice_x", "slice_t")


def default_radius(shape) -> tuple[int, ...]:
    """Smallest radius that makes the restricted operator exact: ``N_i - 1``."""
    return tuple(max(int(n) - 1, 1) for n in shape)


def stretched_grid(grid: LatticeGrid, ell: float) -> LatticeGrid:
    """Congruent grid with the ``t`` axis (last) stretched by ``ell``."""
    if not ell > 0:
        raise ValueError(f"ell must be positive, got {ell}")
    factors = np.ones(grid.dim)
    factors[-1] = ell
    return grid.scaled(factors)


class _Convolution:
    """Zero-extended Toeplitz product along ``axes`` by FFT circulant embedding."""

    def __init__(self, stencil: WeightStencil, shape, axes):
        self.axes = tuple(axes)
        self.n = [shape[a] for a in self.axes]
        self.sizes = [fft.next_fast_len(max(n + r, 2 * r + 1)) for n, r in zip(self.n, stencil.radius)]
        kernel = np.zeros(self.sizes)
        kernel[tuple(slice(0, 2 * r + 1) for r in stencil.radius)] = stencil.weights
        kernel = np.roll(kernel, [-r for r in stencil.radius], axis=tuple(range(len(self.axes))))
        khat = fft.rfftn(kernel)
        bshape = [1] * len(shape)
        for i, a in enumerate(self.axes):
            bshape[a] = khat.shape[i]
        self.khat = khat.reshape(bshape)
        self.crop = tuple(slice(0, shape[a]) if a in self.axes else slice(None) for a in range(len(shape)))

    def __call__(self, u):
        spec = fft.rfftn(u, s=self.sizes, axes=self.axes)
        return fft.irfftn(spec * self.khat, s=self.sizes, axes=self.axes)[self.crop]


def _direct_convolution(stencil: WeightStencil, u, axes):
    """Same product by explicit summation over stencil offsets (reference path)."""
    out = np.zeros_like(u)
    shape = u.shape
    for idx in np.ndindex(*stencil.weights.shape):
        m = [i - r for i, r in zip(idx, stencil.radius)]
        dst = [slice(None)] * u.ndim
        src = [slice(None)] * u.ndim
        for a, off in zip(axes, m):
            n = shape[a]
            if abs(off) >= n:
                break
            dst[a] = slice(max(0, -off), n - max(0, off))
            src[a] = slice(max(0, off), n - max(0, -off))
        else:
            out[tuple(dst)] += stencil.weights[idx] * u[tuple(src)]
    return out


class NonlocalForm:
    """Energy form of a given kind on a grid.

    Parameters
    ----------
    grid : LatticeGrid
    order : FractionalOrder or float
    kind : {"full", "tensor", "slice_x", "slice_t"}
    radius : sequence of int, optional
        Stencil radius per axis; defaults to ``N_i - 1`` (exact restriction).
    oversample, method
        Passed to :func:`~fraclap.weights.compute_weights`.
    matvec : {"fft", "direct"}
        Accelerated or explicit-summation operator product.
    """

    def __init__(self, grid: LatticeGrid, order, kind: str = "full", *, radius=None,
                 oversample: int = 8, method: str = "auto", matvec: str = "fft"):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
        if kind != "full" and grid.dim < 2:
            raise GridMismatchError(f"kind {kind!r} needs a product grid with at least two axes")
        if matvec not in ("fft", "direct"):
            raise ValueError(f"matvec must be 'fft' or 'direct', got {matvec!r}")
        self.grid = grid
        self.order: FractionalOrder = as_order(order)
        self.kind = kind
        self.matvec_method = matvec
        radius = default_radius(grid.shape) if radius is None else tuple(np.broadcast_to(radius, (grid.dim,)))

        x_axes, t_axes = tuple(range(grid.dim - 1)), (grid.dim - 1,)
        groups = {"full": [tuple(range(grid.dim))], "tensor": [x_axes, t_axes],
                  "slice_x": [x_axes], "slice_t": [t_axes]}[kind]
        self.terms = []
        for axes in groups:
            st = compute_weights(self.order, [grid.spacing[a] for a in axes], [radius[a] for a in axes],
                                 oversample=oversample, method=method)
            self.terms.append((axes, st))
        self.stencils = tuple(st for _, st in self.terms)
        self._conv = [_Convolution(st, grid.shape, axes) for axes, st in self.terms] if matvec == "fft" else None

    @property
    def stencil(self) -> WeightStencil:
        """The single stencil of a one-term form (``stencils[0]`` for ``tensor``)."""
        return self.stencils[0]

    @property
    def diagonal(self) -> float:
        """Constant diagonal entry of the operator."""
        return float(sum(st.center for st in self.stencils))

    def matvec(self, values: np.ndarray) -> np.ndarray:
        """Operator product on a flat value array (no mass factor)."""
        u = np.asarray(values, dtype=float).reshape(self.grid.shape)
        if self._conv is not None:
            out = sum(c(u) for c in self._conv)
        else:
            out = sum(_direct_convolution(st, u, axes) for axes, st in self.terms)
        return np.asarray(out).reshape(-1)

    def _check(self, u: GridFunction):
        if u.grid != self.grid:
            raise GridMismatchError("grid function does not live on the form's grid")

    def apply(self, u: GridFunction) -> GridFunction:
        """``T u``, so that ``l2_inner(apply(u), v) == pairing(u, v)``."""
        self._check(u)
        return GridFunction(self.grid, self.matvec(u.values))

    def pairing(self, u: GridFunction, v: GridFunction) -> float:
        self._check(u)
        self._check(v)
        return float(np.dot(v.values, self.matvec(u.values))) * self.grid.cell_volume

    def energy(self, u: GridFunction) -> float:
        return self.pairing(u, u)

    def __repr__(self):
        return f"NonlocalForm(kind={self.kind!r}, s={self.order.s}, shape={self.grid.shape})"


def apply(form: NonlocalForm, u: GridFunction) -> GridFunction:
    return form.apply(u)


def energy(form: NonlocalForm, u: GridFunction) -> float:
    return form.energy(u)


def slice_energy_sum(order, u: GridFunction, axis: str = "x") -> float:
    """Slice energies along ``axis`` integrated over the transverse variable.

    ``axis="x"`` sums the ``x``-energy of every ``t``-slice times ``h_t``;
    ``axis="t"`` is the mirror image. Their sum is the tensor energy.
    """
    if axis not in ("x", "t"):
        raise ValueError(f"axis must be 'x' or 't', got {axis!r}")
    if u.grid.dim < 2:
        raise GridMismatchError("slice energies need a product grid")
    return NonlocalForm(u.grid, order, "slice_" + axis).energy(u)


def scaled_energy(order, grid_unit: LatticeGrid, ell: float, u: GridFunction, kind: str = "full") -> float:
    """Rescaled energy of ``u`` given on the unit-section grid.

    Evaluates the form of ``kind`` on the grid with ``t`` stretched by ``ell``
    (same values) and divides by the section measure ``ell * N_t * h_t``.
    """
    if not ell > 0:
        raise ValueError(f"ell must be positive, got {ell}")
    if u.grid != grid_unit:
        raise GridMismatchError("u must live on grid_unit")
    big = stretched_grid(grid_unit, ell)
    e = NonlocalForm(big, order, kind).energy(GridFunction(big, u.values))
    return e / big.axis_mass(-1)
