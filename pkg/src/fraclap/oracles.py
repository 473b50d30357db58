"""Reference computations independent of the lattice stencil.

* :func:`fourier_energy` integrates ``|xi|**(2s) |F[f](xi)|**2`` with the
  unitary Fourier transform.
* :func:`montecarlo_gagliardo` estimates the singular double integral with the
  constant :func:`gagliardo_constant` and the exterior mass :func:`tail_kappa`.
* :func:`local_baseline_lambda` is the closed-form first eigenvalue of the
  three-point Laplacian (the ``s = 1`` baseline).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import gammaln, roots_jacobi, roots_legendre

from .lattice import LatticeGrid
from .weights import DomainError, PrecisionError, as_order

TAIL_RTOL = 1e-10


@dataclass(frozen=True)
class AnalyticFunction:
    """A one-dimensional test function with its Fourier transform.

    Attributes
    ----------
    name : str
    evaluate : callable
        Pointwise values ``f(x)``.
    fourier_transform : callable
        Unitary transform ``(2 pi)**-0.5 * int f(x) exp(-i x xi) dx``; only
        its modulus is used.
    support : (float, float)
        Interval outside which ``f`` vanishes (or is negligible).
    cutoff : float
        Default frequency cutoff for :func:`fourier_energy`.
    fourier_energy_closed_form : callable, optional
        ``s -> E^s(f)`` when known.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    fourier_transform: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    cutoff: float
    fourier_energy_closed_form: Optional[Callable[[float], float]] = None

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))


def gaussian(truncation: float = 12.0) -> AnalyticFunction:
    """``exp(-x**2 / 2)``, whose energy is ``Gamma(s + 1/2)``."""
    return AnalyticFunction(
        name="gaussian",
        evaluate=lambda x: np.exp(-0.5 * x**2),
        fourier_transform=lambda xi: np.exp(-0.5 * np.asarray(xi) ** 2),
        support=(-truncation, truncation),
        cutoff=12.0,
        fourier_energy_closed_form=lambda s: math.gamma(s + 0.5),
    )


def bump_profile(r):
    """Smooth bump ``exp(1 - 1 / (1 - r**2))`` on ``|r| < 1``, zero elsewhere, value 1 at 0."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def _bump_transform(xi, nodes: int = 4096):
    # trapezoid is spectrally accurate for a function flat to all orders at the ends
    x = np.linspace(0.0, 1.0, nodes + 1)
    fx = bump_profile(x)
    w = np.full(x.size, 1.0 / nodes)
    w[[0, -1]] *= 0.5
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty(xi.shape)
    for i in range(0, xi.size, 256):
        chunk = xi.ravel()[i:i + 256]
        out.ravel()[i:i + 256] = np.cos(np.outer(chunk, x)) @ (w * fx)
    return 2.0 * out / math.sqrt(2.0 * math.pi)


def bump() -> AnalyticFunction:
    """The standard bump supported in ``(-1, 1)``; transform by quadrature."""
    return AnalyticFunction(
        name="bump",
        evaluate=bump_profile,
        fourier_transform=_bump_transform,
        support=(-1.0, 1.0),
        cutoff=400.0,
    )


def _energy_quadrature(f, s, a, b, quad_points):
    """``int_a^b xi**(2s) |F f|**2`` with Gauss-Jacobi on the first panel when a == 0."""
    total = 0.0
    start = a
    if a == 0.0:
        first = min(1.0, b)
        x, w = roots_jacobi(quad_points, 0.0, 2.0 * s)
        xi = 0.5 * first * (1.0 + x)
        total += float(np.sum(w * np.abs(f.fourier_transform(xi)) ** 2)) * (0.5 * first) ** (1.0 + 2.0 * s)
        start = first
    if b > start:
        x, w = roots_legendre(quad_points)
        edges = np.linspace(start, b, int(np.ceil((b - start) / 2.0)) + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        xi = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
        ww = (0.5 * (hi - lo) * w).ravel()
        total += float(np.sum(ww * xi ** (2.0 * s) * np.abs(f.fourier_transform(xi)) ** 2))
    return total


def fourier_energy(f: AnalyticFunction, order, cutoff: float | None = None, quad_points: int = 40) -> float:
    """Fourier-side energy ``int |xi|**(2s) |F f|**2 d xi`` of a 1-D function.

    The integrand is even, so twice the half-line integral over ``[0, cutoff]``
    is returned. ``s = 1`` is allowed.

    Raises
    ------
    PrecisionError
        If the mass on ``[cutoff, 2 cutoff]`` exceeds ``TAIL_RTOL`` of the total.
    """
    s = as_order(order).s
    c = f.cutoff if cutoff is None else float(cutoff)
    body = 2.0 * _energy_quadrature(f, s, 0.0, c, quad_points)
    tail = 2.0 * _energy_quadrature(f, s, c, 2.0 * c, quad_points)
    if abs(tail) > TAIL_RTOL * abs(body):
        raise PrecisionError(f"frequency tail {tail:.3e} exceeds {TAIL_RTOL:g} of the energy {body:.3e}")
    return body


def gagliardo_constant(dim: int, order) -> float:
    """``C_{d,s} = s 2**(2s) Gamma((d + 2s) / 2) / (pi**(d/2) Gamma(1 - s))``."""
    s = as_order(order).require_fractional().s
    return s * 2.0 ** (2 * s) * math.exp(gammaln(0.5 * (dim + 2 * s)) - gammaln(1 - s)) / math.pi ** (0.5 * dim)


def tail_kappa(x, interval: tuple[float, float], order):
    """``int_{R \\ (a, b)} |x - y|**(-1 - 2s) dy = ((x - a)**(-2s) + (b - x)**(-2s)) / (2s)``."""
    s = as_order(order).require_fractional().s
    a, b = interval
    x = np.asarray(x, dtype=float)
    if np.any((x <= a) | (x >= b)):
        raise ValueError(f"tail_kappa needs a < x < b, got x outside ({a}, {b})")
    out = ((x - a) ** (-2 * s) + (b - x) ** (-2 * s)) / (2 * s)
    return float(out) if out.ndim == 0 else out


def montecarlo_gagliardo(f: AnalyticFunction, order, support_box: tuple[float, float] | None = None,
                         samples: int = 200_000, seed: int = 0, chunk: int = 50_000) -> tuple[float, float]:
    """Monte-Carlo estimate of the Gagliardo energy of a 1-D function.

    The energy splits as ``C/2 * I + C * int f**2 kappa``: ``I`` is the double
    integral over the box, sampled with ``z`` uniform and ``eta - z`` drawn
    with density ``|r|**(1 - 2s)`` on ``|r| < L`` (the box length), which
    cancels the kernel singularity down to a bounded difference quotient; the
    exterior part is integrated deterministically.

    Returns
    -------
    (estimate, stderr)
        ``stderr`` is the standard error of the sampled part.
    """
    s = as_order(order)
    if s.s >= 1.0:
        raise DomainError("the Gagliardo constant has a pole at s = 1")
    s = s.s
    a, b = f.support if support_box is None else support_box
    L = b - a
    C = gagliardo_constant(1, s)
    rng = np.random.Generator(np.random.Philox(key=seed))

    total = total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        z = a + L * rng.random(m)
        r = L * rng.random(m) ** (1.0 / (2.0 - 2.0 * s)) * np.where(rng.random(m) < 0.5, -1.0, 1.0)
        eta = z + r
        inside = (eta > a) & (eta < b)
        diff = np.zeros(m)
        diff[inside] = f(z[inside]) - f(eta[inside])
        vals = diff**2 / r**2 * (2.0 * L ** (3.0 - 2.0 * s) / (2.0 - 2.0 * s))
        total += vals.sum()
        total_sq += (vals**2).sum()
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0)
    interior = 0.5 * C * mean
    stderr = 0.5 * C * math.sqrt(var / samples)

    ext, _ = integrate.quad(lambda x: float(f(x)) ** 2 * tail_kappa(x, (a, b), s), a, b, limit=400,
                            epsabs=1e-13, epsrel=1e-11)
    return interior + C * ext, stderr


def local_baseline_lambda(omega_grid: LatticeGrid) -> float:
    """First eigenvalue ``(4 / h**2) sin(pi h / (2 L))**2`` of the 3-point Laplacian."""
    if omega_grid.dim != 1:
        raise ValueError("local_baseline_lambda needs a 1-D grid")
    h = omega_grid.spacing[0]
    L = omega_grid.domain.lengths[0]
    return 4.0 / h**2 * math.sin(math.pi * h / (2.0 * L)) ** 2
