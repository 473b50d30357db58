"""Stencil weights of the lattice fractional Laplacian.

The operator is the Fourier multiplier ``sigma(theta)**s`` on the lattice
``prod_i h_i Z``, where ``sigma(theta) = sum_i 4 sin(theta_i / 2)**2 / h_i**2``
is the symbol of the standard discrete Laplacian. Its weights are the
Fourier coefficients

    w_m = (2 pi)^-d  int_{[-pi, pi]^d} sigma(theta)**s exp(-i m.theta) dtheta.

Two independent routes compute them:

``fft``
    Sample the symbol on a uniform periodic grid, take a DFT, and remove the
    aliasing error by Richardson extrapolation over a ladder of sampling
    densities. The aliasing error of the DFT coefficients expands in powers
    ``M**-(d + 2s + 2p)`` of the sample count, which the ladder eliminates.

``heat``
    Subordinate the heat semigroup:
    ``lambda**s = s / Gamma(1 - s) * int_0^inf (1 - exp(-t lambda)) t**(-1-s) dt``.
    The lattice heat kernel factorizes into exponentially scaled Bessel
    functions ``ive(m_i, 2 t / h_i**2)``, so ``w_m`` becomes a one-dimensional
    integral evaluated with Gauss-Legendre panels in ``log t`` plus series
    for the head ``t -> 0`` and the tail ``t -> inf``. Cost is linear in the
    stencil size, which makes it the route of choice in two dimensions.

The one-dimensional unit-spacing weights also have a closed Gamma-ratio
form (:func:`closed_form_weights_1d`) used purely as an oracle.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, ive, roots_legendre

# Weights must reproduce to this relative accuracy when the sampling is refined.
ALIAS_TOL = 1e-8

_FFT_LEVELS = 4
_FFT_MAX_POINTS = 2**25
_HEAD_X = 1e-2
_HEAD_TERMS = 14
_HEAD_ORDERS = 40
_TAIL_TERMS = 12
_IVE_SWITCH = 1e9


class PrecisionError(ArithmeticError):
    """Weights failed their refinement check or sign invariants."""


class DomainError(ValueError):
    """A fractional order outside the range an operation supports."""


@dataclass(frozen=True)
class FractionalOrder:
    """Exponent ``s`` of ``(-Laplacian)**s``.

    ``0 < s < 1`` is the fractional range. ``s == 1`` is accepted as the local
    baseline (the plain discrete Laplacian); operations that have no local
    meaning call :meth:`require_fractional`.
    """

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not (0.0 < s <= 1.0):
            raise DomainError(f"order s must lie in (0, 1], got {s}")
        object.__setattr__(self, "s", s)

    @property
    def is_local(self) -> bool:
        return self.s == 1.0

    def require_fractional(self) -> "FractionalOrder":
        if self.is_local:
            raise DomainError("this operation needs 0 < s < 1; s = 1 is only a local baseline")
        return self

    def __float__(self):
        return self.s


def as_order(order: FractionalOrder | float) -> FractionalOrder:
    return order if isinstance(order, FractionalOrder) else FractionalOrder(order)


class WeightStencil:
    """Weights ``w_m`` for offsets ``-R_i <= m_i <= R_i``.

    ``weights[R + m] == w_m`` (array indices shifted by the radius). The
    restricted operator on a grid with ``N_i <= R_i + 1`` nodes per axis is
    exact: every pair of interior nodes is within reach, and the diagonal
    weight ``w_0`` already carries all exterior interactions.
    """

    def __init__(self, order, spacing, radius, weights, method):
        self.order = order
        self.spacing = tuple(float(h) for h in spacing)
        self.radius = tuple(int(r) for r in radius)
        w = np.array(weights, dtype=float)
        w.setflags(write=False)
        self.weights = w
        self.method = method

    @property
    def dim(self) -> int:
        return len(self.spacing)

    @property
    def center(self) -> float:
        return float(self.weights[self.radius])

    def weight(self, offset: Sequence[int] | int) -> float:
        off = np.atleast_1d(offset)
        if np.any(np.abs(off) > self.radius):
            return 0.0 if self.order.is_local else float("nan")
        return float(self.weights[tuple(int(r + m) for r, m in zip(self.radius, off))])

    @property
    def retained_sum(self) -> float:
        """``sum_m w_m`` over retained offsets.

        The full lattice sum vanishes (the symbol is zero at the origin), so
        this equals the mass of the truncated far field with opposite sign.
        """
        return float(self.weights.sum())

    def to_csv(self, path) -> None:
        """Write ``offset_1..offset_d, weight`` rows."""
        grids = np.meshgrid(*(np.arange(-r, r + 1) for r in self.radius), indexing="ij")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"offset_{i + 1}" for i in range(self.dim)] + ["weight"])
            for idx in np.ndindex(*self.weights.shape):
                writer.writerow([int(g[idx]) for g in grids] + [repr(float(self.weights[idx]))])

    def __repr__(self):
        return (f"WeightStencil(s={self.order.s}, spacing={self.spacing}, "
                f"radius={self.radius}, method={self.method!r})")


def compute_weights(order, spacing, radius, oversample: int = 8, method: str = "auto") -> WeightStencil:
    """Weights of ``sigma(theta)**s`` for the given spacing and radius.

    Parameters
    ----------
    order : FractionalOrder or float
    spacing : float or sequence of float
        Lattice spacing per axis; anisotropic spacing is supported.
    radius : int or sequence of int
        Largest retained offset per axis (``R >= 1``).
    oversample : int
        Sampling factor of the ``fft`` route; the base DFT has
        ``oversample * (2R + 2)`` points per axis. Must be at least 4.
    method : {"auto", "fft", "heat"}
        ``auto`` uses ``fft`` in one dimension, falling back to ``heat`` when
        the aliasing check fails, and ``heat`` otherwise.

    Raises
    ------
    PrecisionError
        If doubling the sampling changes a weight by more than ``ALIAS_TOL``
        relative, or the sign pattern ``w_0 > 0 > w_m`` breaks.
    """
    order = as_order(order)
    h = np.atleast_1d(np.asarray(spacing, dtype=float))
    if np.any(h <= 0):
        raise ValueError(f"spacing must be positive, got {h}")
    R = np.broadcast_to(np.atleast_1d(np.asarray(radius, dtype=int)), h.shape)
    if np.any(R < 1):
        raise ValueError(f"radius must be >= 1, got {radius}")
    if oversample < 4:
        raise ValueError(f"oversample must be >= 4, got {oversample}")
    if method not in ("auto", "fft", "heat"):
        raise ValueError(f"unknown method {method!r}")

    # Homogeneity: w(c h) = c**(-2s) w(h), so only the spacing ratios are cached.
    scale = float(h[0])
    key = (order.s, tuple(h / scale), tuple(int(r) for r in R), int(oversample))
    if method == "auto" and h.size == 1:
        try:
            method, w = "fft", _unit_weights(*key, "fft")
        except PrecisionError:
            # near s = 1 the far weights sink below FFT roundoff; the heat route keeps relative accuracy
            method, w = "heat", _unit_weights(*key, "heat")
    else:
        method = "heat" if method == "auto" else method
        w = _unit_weights(*key, method)
    return WeightStencil(order, tuple(h), tuple(R), w * scale ** (-2.0 * order.s), method)


@functools.lru_cache(maxsize=64)
def _unit_weights(s, ratios, radius, oversample, method):
    h = np.array(ratios)
    if s == 1.0:
        w = _local_weights(h, radius)
    elif method == "fft":
        w = _fft_weights(s, h, radius, oversample)
    else:
        w = _heat_weights(s, h, radius)
        check = _heat_weights(s, h, radius, nodes=16)
        _refinement_check(w, check, "heat quadrature")
    if s != 1.0:
        _check_signs(w, radius)
    w.setflags(write=False)
    return w


def _local_weights(h, radius):
    w = np.zeros(tuple(2 * r + 1 for r in radius))
    center = tuple(radius)
    w[center] = float(np.sum(2.0 / h**2))
    for i, hi in enumerate(h):
        for sgn in (-1, 1):
            idx = list(center)
            idx[i] += sgn
            w[tuple(idx)] = -1.0 / hi**2
    return w


def _mirror(quadrant):
    """Extend weights given for ``m_i >= 0`` to all sign combinations."""
    w = quadrant
    for ax in range(w.ndim):
        neg = np.flip(np.take(w, np.arange(1, w.shape[ax]), axis=ax), axis=ax)
        w = np.concatenate([neg, w], axis=ax)
    return w


def _check_signs(w, radius):
    center = tuple(radius)
    off = w.copy()
    off[center] = -1.0
    if not (w[center] > 0 and np.all(off < 0)):
        raise PrecisionError("weights violate w_0 > 0 > w_m; refine the computation")


def _refinement_check(a, b, what):
    rel = np.max(np.abs(a - b) / np.abs(a))
    if not rel <= ALIAS_TOL:
        raise PrecisionError(f"{what}: refinement changed weights by {rel:.2e} relative (> {ALIAS_TOL:g})")


# --------------------------------------------------------------------------
# fft route

def _sampled_quadrant(s, h, radius, counts):
    axes = [2.0 * np.pi * np.arange(M) / M for M in counts]
    sigma = np.zeros(tuple(counts))
    for i, th in enumerate(axes):
        shape = [1] * len(counts)
        shape[i] = -1
        sigma = sigma + (4.0 * np.sin(th / 2.0) ** 2 / h[i] ** 2).reshape(shape)
    coeffs = np.fft.rfftn(sigma**s).real / np.prod(counts)
    return coeffs[tuple(slice(0, r + 1) for r in radius)]


def _richardson(ladder, s, d):
    vals = list(ladder)
    for p in range(len(vals) - 1):
        f = 2.0 ** (d + 2.0 * s + 2.0 * p)
        vals = [(f * vals[i + 1] - vals[i]) / (f - 1.0) for i in range(len(vals) - 1)]
    return vals[0]


def _fft_weights(s, h, radius, oversample):
    d = len(radius)
    base = [oversample * (2 * r + 2) for r in radius]
    finest = np.prod(base) * 2.0 ** (d * _FFT_LEVELS)
    if finest > _FFT_MAX_POINTS:
        raise ValueError(f"fft route needs {finest:.3g} samples; use method='heat' for this stencil")
    ladder = [_sampled_quadrant(s, h, radius, [M * 2**k for M in base]) for k in range(_FFT_LEVELS + 1)]
    w = _richardson(ladder[:-1], s, d)
    doubled = _richardson(ladder[1:], s, d)
    _refinement_check(w, doubled, "fft aliasing check")
    return _mirror(w)


# --------------------------------------------------------------------------
# heat route

def _small_x_coeffs(orders, terms):
    """``b[m, n]`` with ``exp(-x) I_m(x) = sum_n b[m, n] x**(m + n)``."""
    e = np.array([(-1.0) ** j / math.factorial(j) for j in range(terms)])
    out = np.zeros((orders, terms))
    k = np.arange((terms + 1) // 2)
    for m in range(orders):
        series = np.zeros(terms)
        series[2 * k] = np.exp(-(2 * k + m) * np.log(2.0) - gammaln(k + 1) - gammaln(k + m + 1))
        out[m] = np.convolve(e, series)[:terms]
    return out


def _large_x_coeffs(orders, terms):
    """``c[m, k]`` with ``exp(-x) I_m(x) ~ (2 pi x)**-0.5 sum_k c[m, k] x**-k``."""
    m2 = 4.0 * np.arange(orders, dtype=float) ** 2
    c = np.ones((orders, terms))
    for k in range(1, terms):
        c[:, k] = -c[:, k - 1] * (m2 - (2 * k - 1) ** 2) / (8.0 * k)
    return c


def _scaled_bessel(orders, x):
    x = np.asarray(x, dtype=float)
    out = np.empty((orders, x.size))
    small = x <= _IVE_SWITCH
    out[:, small] = ive(np.arange(orders)[:, None], x[None, small])
    if not small.all():
        big = x[~small]
        # successive terms shrink like m**2 / (2 k x); 12 terms give ~1e-12 up to m**2 = x
        if (orders - 1) ** 2 > big.min():
            raise PrecisionError("stencil radius too large for the Bessel asymptotic range")
        powers = big[None, :] ** (-np.arange(_TAIL_TERMS)[:, None])
        out[:, ~small] = (_large_x_coeffs(orders, _TAIL_TERMS) @ powers) / np.sqrt(2 * np.pi * big)
    return out


def _heat_weights(s, h, radius, nodes=24):
    d = len(radius)
    alpha = 2.0 / np.asarray(h) ** 2
    orders = [r + 1 for r in radius]
    t0 = _HEAD_X / alpha.max()
    T = max(1e6, 100.0 * max(radius) ** 2) / alpha.min()

    xg, wg = roots_legendre(nodes)
    edges = np.linspace(np.log(t0), np.log(T), int(np.ceil(np.log(T / t0))) + 1)
    a, b = edges[:-1, None], edges[1:, None]
    y = (0.5 * (b - a) * xg + 0.5 * (a + b)).ravel()
    q = (0.5 * (b - a) * wg).ravel() * np.exp(-s * y)
    t = np.exp(y)
    F = [_scaled_bessel(n, alpha[i] * t) for i, n in enumerate(orders)]

    letters = "ijk"[:d]
    body = np.einsum(",".join(f"{c}n" for c in letters) + ",n->" + letters, *F, q)

    # head: integrate the small-x power series over (0, t0)
    head = np.zeros(tuple(orders))
    H, P = [], []
    for i, n in enumerate(orders):
        m = np.arange(min(n, _HEAD_ORDERS))[:, None]
        k = np.arange(_HEAD_TERMS)[None, :]
        H.append(_small_x_coeffs(m.shape[0], _HEAD_TERMS) * np.exp((m + k) * np.log(alpha[i] * t0)))
        P.append(m + k)
    sub = tuple(slice(0, Hi.shape[0]) for Hi in H)
    for ks in np.ndindex(*(_HEAD_TERMS,) * d):
        term = functools.reduce(np.multiply.outer, [H[i][:, ks[i]] for i in range(d)])
        power = functools.reduce(np.add.outer, [P[i][:, ks[i]] for i in range(d)])
        head[sub] += term / (power - s)
    head *= t0 ** (-s)

    # tail: integrate the large-x asymptotic series over (T, inf)
    L = []
    for i, n in enumerate(orders):
        k = np.arange(_TAIL_TERMS)[None, :]
        L.append(_large_x_coeffs(n, _TAIL_TERMS) * (alpha[i] * T) ** (-k) / np.sqrt(2 * np.pi * alpha[i] * T))
    tail = np.zeros(tuple(orders))
    for ks in np.ndindex(*(_TAIL_TERMS,) * d):
        term = functools.reduce(np.multiply.outer, [L[i][:, ks[i]] for i in range(d)])
        tail += term / (0.5 * d + sum(ks) + s)
    tail *= T ** (-s)

    c = s / math.exp(gammaln(1.0 - s))
    w = -c * (body + head + tail)
    # m = 0: the integrand is 1 - P(t) instead of -P(t)
    z = (0,) * d
    P0 = functools.reduce(np.multiply, [Fi[0] for Fi in F])
    body0 = float(np.sum((1.0 - P0) * q))
    head0 = -(head[z] + t0 ** (-s) / s)
    tail0 = T ** (-s) / s - tail[z]
    w[z] = c * (body0 + head0 + tail0)
    return _mirror(w)


# --------------------------------------------------------------------------
# closed form (oracle only)

def closed_form_weights_1d(order, m) -> np.ndarray | float:
    """Unit-spacing 1-D weights from the Gamma-ratio formula.

    ``w_0 = 4**s Gamma(1/2 + s) / (sqrt(pi) Gamma(1 + s))`` and, for ``m >= 1``,
    ``w_m = -4**s Gamma(1/2 + s) / (sqrt(pi) |Gamma(-s)|) * Gamma(m - s) / Gamma(m + 1 + s)``.
    Accepts scalar or array ``m >= 0``.
    """
    s = as_order(order).require_fractional().s
    m_arr = np.asarray(m)
    if np.any(m_arr < 0):
        raise ValueError("closed_form_weights_1d expects m >= 0")
    lead = s * math.log(4.0) + gammaln(0.5 + s) - 0.5 * math.log(math.pi)
    log_abs_gamma_neg_s = gammaln(1.0 - s) - math.log(s)
    mm = np.maximum(m_arr, 1).astype(float)
    far = -np.exp(lead - log_abs_gamma_neg_s + gammaln(mm - s) - gammaln(mm + 1.0 + s))
    w0 = math.exp(lead - gammaln(1.0 + s))
    out = np.where(m_arr == 0, w0, far)
    return float(out) if out.ndim == 0 else out
