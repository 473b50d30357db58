"""Dimension reduction on cylinders ``omega x (-ell, ell)``.

Two grids describe the same discrete cylinder:

* the *physical* grid of ``Omega_ell`` with fixed spacing ``(h_x, h_t)`` and
  ``N_t = ell (2 / h_t) - 1`` nodes along ``t``;
* the *unit* grid of ``Omega_1``, the physical grid compressed by ``ell``
  along ``t`` (same node counts, spacing ``h_t / ell``).

:func:`breve_rescale` maps unit to physical by stretching ``t``; the value
array is untouched. The section measure is the node mass ``N_t h_t``, which
makes averaging over ``t`` the uniform node mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh

from .forms import NonlocalForm, scaled_energy, stretched_grid
from .lattice import BoxDomain, GridFunction, GridMismatchError, LatticeGrid, interval, l2_inner, l2_norm, product_grid
from .oracles import bump_profile
from .solvers import cg_solve, smallest_eigenpair

PROFILES = ("one", "parabola", "cosine", "eigen")
PERTURBATIONS = ("linear", "cosine")

_ANALYTIC: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda x: np.ones_like(x),
    "parabola": lambda x: 1.0 - x**2,
    "cosine": lambda x: np.cos(0.5 * np.pi * x),
}


@dataclass(frozen=True)
class LoadSpec:
    """Load ``f_ell(x, t) = a(x) + ell**-alpha g(x, t / ell)``.

    ``profile`` names ``a`` and ``perturbation`` names ``g`` (``None`` for a
    ``t``-independent load): ``linear`` is ``a(x) tau`` and ``cosine`` is
    ``a(x) cos(pi tau / 2)``. The ``eigen`` profile is the principal
    eigenfunction of the section form, scaled to unit maximum.
    """

    profile: str = "one"
    perturbation: Optional[str] = None
    alpha: float = 1.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if self.perturbation is not None and self.perturbation not in PERTURBATIONS:
            raise ValueError(f"perturbation must be one of {PERTURBATIONS} or None")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def section_values(self, order, omega_grid: LatticeGrid) -> np.ndarray:
        """Nodal values of ``a`` on the section grid."""
        if self.profile == "eigen":
            v = _principal_vector(NonlocalForm(omega_grid, order))
            return v / v.max()
        return np.asarray(_ANALYTIC[self.profile](omega_grid.coords(0)), dtype=float)

    def f_inf(self, order, omega_grid: LatticeGrid) -> GridFunction:
        return GridFunction(omega_grid, self.section_values(order, omega_grid))

    def _perturbation(self, tau):
        if self.perturbation is None:
            return np.zeros_like(tau)
        return tau if self.perturbation == "linear" else np.cos(0.5 * np.pi * tau)

    def f_breve(self, order, unit_grid: LatticeGrid, ell: float) -> GridFunction:
        """``f_ell(x, ell tau)`` sampled on the unit grid."""
        a = self.section_values(order, section_grid(unit_grid))
        tau = unit_grid.coords(unit_grid.dim - 1)
        vals = a[:, None] * (1.0 + ell ** (-self.alpha) * self._perturbation(tau)[None, :])
        return GridFunction(unit_grid, vals)

    def f_ell(self, order, cylinder: LatticeGrid, ell: float) -> GridFunction:
        """``f_ell`` sampled on the physical cylinder grid."""
        return GridFunction(cylinder, self.f_breve(order, unbreve_grid(cylinder, ell), ell).values)


def _principal_vector(form: NonlocalForm) -> np.ndarray:
    """Principal eigenvector to full precision (dense on small grids, refined otherwise)."""
    n = form.grid.size
    if n <= 2048:
        mat = np.column_stack([form.matvec(e) for e in np.eye(n)])
        _, vec = eigh(0.5 * (mat + mat.T), subset_by_index=[0, 0])
        v = vec[:, 0]
    else:
        v = smallest_eigenpair(form, 1e-12).vector.values
        for _ in range(3):
            v, _ = cg_solve(form, GridFunction(form.grid, v), 1e-14)
            v = v.values / np.linalg.norm(v.values)
    return v if v.sum() >= 0 else -v


def section_grid(grid: LatticeGrid) -> LatticeGrid:
    """The ``x`` factor of a product grid (all axes but the last)."""
    if grid.dim < 2:
        raise GridMismatchError("need a product grid")
    d = grid.domain
    return LatticeGrid(BoxDomain(d.lo[:-1], d.hi[:-1]), grid.shape[:-1])


def cylinder_grid(omega_grid: LatticeGrid, ell: float, ht: float) -> LatticeGrid:
    """Physical grid of ``omega x (-ell, ell)`` with ``t``-spacing ``ht``."""
    if not ell > 0:
        raise ValueError("ell must be positive")
    return product_grid(omega_grid, LatticeGrid.from_spacing(interval(-ell, ell), ht))


def unit_grid(omega_grid: LatticeGrid, ell: float, ht: float) -> LatticeGrid:
    """Unit-section grid congruent to :func:`cylinder_grid` (``t`` compressed by ``ell``)."""
    return unbreve_grid(cylinder_grid(omega_grid, ell, ht), ell)


def unbreve_grid(grid: LatticeGrid, ell: float) -> LatticeGrid:
    d = grid.domain
    dom = BoxDomain(d.lo[:-1] + (d.lo[-1] / ell,), d.hi[:-1] + (d.hi[-1] / ell,))
    return LatticeGrid(dom, grid.shape)


def breve_rescale(v: GridFunction, ell: float) -> GridFunction:
    """``v(x, t / ell)``: same values on the grid stretched by ``ell`` along ``t``."""
    return GridFunction(stretched_grid(v.grid, ell), v.values)


def unbreve(u: GridFunction, ell: float) -> GridFunction:
    """Inverse of :func:`breve_rescale`."""
    if not ell > 0:
        raise ValueError("ell must be positive")
    return GridFunction(unbreve_grid(u.grid, ell), u.values)


def average_rho(v: GridFunction) -> GridFunction:
    """Mean over ``t``-nodes at every ``x``-node."""
    return GridFunction(section_grid(v.grid), v.array.mean(axis=-1))


def averaging_chain(order, v: GridFunction, ell: float) -> tuple[float, float, float]:
    """``(E_x(rho v), mean slice energy, rescaled full energy)`` for ``v`` on a unit grid.

    The three numbers are nondecreasing for every ``v`` (Jensen, then the
    slice bound).
    """
    sec = section_grid(v.grid)
    e_avg = NonlocalForm(sec, order).energy(average_rho(v))
    mean_slice = NonlocalForm(v.grid, order, "slice_x").energy(v) / v.grid.axis_mass(-1)
    return e_avg, mean_slice, scaled_energy(order, v.grid, ell, v)


def solve_dirichlet_cylinder(order, omega_grid: LatticeGrid, ell: float, t_resolution: float,
                             load: LoadSpec, tol: float = 1e-10, with_report: bool = False):
    """Discrete ``u_ell`` on the physical cylinder grid."""
    grid = cylinder_grid(omega_grid, ell, t_resolution)
    u, rep = cg_solve(NonlocalForm(grid, order), load.f_ell(order, grid, ell), tol)
    return (u, rep) if with_report else u


def solve_dirichlet_section(order, omega_grid: LatticeGrid, f_inf: GridFunction, tol: float = 1e-10,
                            with_report: bool = False):
    """Discrete ``u_inf`` on the section grid."""
    if f_inf.grid != omega_grid:
        raise GridMismatchError("f_inf must live on omega_grid")
    u, rep = cg_solve(NonlocalForm(omega_grid, order), f_inf, tol)
    return (u, rep) if with_report else u


def reduction_error(order, u_ell: GridFunction, u_inf: GridFunction) -> tuple[float, float]:
    """``(energy norm, L2 norm)`` of ``rho(u_ell) - u_inf`` on the section."""
    avg = average_rho(u_ell)
    if avg.grid != u_inf.grid:
        raise GridMismatchError("section grids differ")
    diff = avg - u_inf
    hs = math.sqrt(max(NonlocalForm(u_inf.grid, order).energy(diff), 0.0))
    return hs, l2_norm(diff)


def functional_I(order, ell: float, v: GridFunction, load: LoadSpec) -> float:
    """``1/2 E_ell(v) - G_ell(v)`` on the unit grid, or ``1/2 E(v) - (f_inf, v)`` at ``ell = inf``."""
    if math.isinf(ell):
        if v.grid.dim != 1:
            raise GridMismatchError("ell = inf expects a function on the section grid")
        return 0.5 * NonlocalForm(v.grid, order).energy(v) - l2_inner(load.f_inf(order, v.grid), v)
    if v.grid.dim < 2:
        raise GridMismatchError("finite ell expects a function on the unit cylinder grid")
    pairing = l2_inner(load.f_breve(order, v.grid, ell), v) / v.grid.axis_mass(-1)
    return 0.5 * scaled_energy(order, v.grid, ell, v) - pairing


def equicoercivity_bounds(lambda_omega: float, load_norm: float, level: float) -> tuple[float, float]:
    """Bounds implied by ``I_ell(v) <= level``.

    With ``a = ||v|| / sqrt|B_1|`` and ``F = ||f|| / sqrt|B_1|``, the Poincare
    bound ``E_ell(v) >= lambda a**2`` and ``G_ell(v) <= F a`` give
    ``a <= (F + sqrt(F**2 + 2 lambda level)) / lambda`` and then
    ``E_x(rho v) <= E_ell(v) <= 2 (level + F a)``.

    Returns
    -------
    (a_bound, energy_bound)
    """
    a = (load_norm + math.sqrt(load_norm**2 + 2.0 * lambda_omega * max(level, 0.0))) / lambda_omega
    return a, 2.0 * (level + load_norm * a)


def cutoff_profile(t, ell: float) -> np.ndarray:
    """``phi(|t|**ell)`` with the standard bump ``phi``; equals 1 at ``t = 0``."""
    if not ell >= 1:
        raise ValueError("ell must be >= 1")
    return bump_profile(np.abs(np.asarray(t, dtype=float)) ** ell)


def recovery_sequence(u: GridFunction, ell: float, t_grid: LatticeGrid) -> GridFunction:
    """``u(x) phi(|t|**ell)`` on the product of ``u.grid`` and ``t_grid``."""
    phi = cutoff_profile(t_grid.coords(0), ell)
    return GridFunction(product_grid(u.grid, t_grid), np.outer(u.values, phi))


def section_load_norm(order, unit: LatticeGrid, ell: float, load: LoadSpec) -> float:
    """``||f_breve|| / sqrt|B_1|`` on the unit grid."""
    return l2_norm(load.f_breve(order, unit, ell)) / math.sqrt(unit.axis_mass(-1))


def minimum_value(order, u_ell: GridFunction, ell: float, load: LoadSpec) -> float:
    """``I_ell`` at the rescaled discrete solution (the discrete minimum)."""
    return functional_I(order, ell, unbreve(u_ell, ell), load)


__all__ = [
    "LoadSpec", "PROFILES", "PERTURBATIONS", "section_grid", "cylinder_grid", "unit_grid", "unbreve_grid",
    "breve_rescale", "unbreve", "average_rho", "averaging_chain", "solve_dirichlet_cylinder",
    "solve_dirichlet_section", "reduction_error", "functional_I", "equicoercivity_bounds",
    "cutoff_profile", "recovery_sequence", "section_load_norm", "minimum_value",
]
