"""Linear solves and smallest eigenpairs for the lattice forms.

The mass matrix of every form is the scalar ``prod(h)``, so the weak problem
``pairing(u, phi) = (f, phi)`` reduces to ``T u = f`` and the generalized
eigenproblem to ``T v = lambda v``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, qr

from .forms import NonlocalForm
from .lattice import GridFunction, l2_inner


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; ``best`` holds the best iterate found."""

    def __init__(self, message, best=None, report=None):
        super().__init__(message)
        self.best = best
        self.report = report


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    relative_residual: float
    elapsed: float


def _cg(matvec, b, x0, tol, max_iter):
    """Plain conjugate gradients; returns the best iterate by recursive residual."""
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - matvec(x) if x0 is not None else b.copy()
    bnorm = np.linalg.norm(b)
    rr = float(r @ r)
    best, best_res = x.copy(), np.sqrt(rr) / bnorm
    p = r.copy()
    for it in range(1, max_iter + 1):
        if best_res <= tol:
            return best, it - 1, best_res, True
        Ap = matvec(p)
        alpha = rr / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(r @ r)
        res = np.sqrt(rr_new) / bnorm
        if res < best_res:
            best, best_res = x.copy(), res
        p = r + (rr_new / rr) * p
        rr = rr_new
    return best, max_iter, best_res, best_res <= tol


def cg_solve(form: NonlocalForm, rhs: GridFunction, tol: float = 1e-12, max_iter: int = 20000,
             x0: GridFunction | None = None) -> tuple[GridFunction, SolveReport]:
    """Solve ``T u = rhs`` to relative residual ``tol``.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` iterations, carrying the best iterate.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if rhs.grid != form.grid:
        raise ValueError("rhs does not live on the form's grid")
    start = time.perf_counter()
    b = np.asarray(rhs.values, dtype=float)
    if not np.any(b):
        return GridFunction.zeros(form.grid), SolveReport(0, 0.0, time.perf_counter() - start)
    guess = None if x0 is None else x0.values
    x, its, _, ok = _cg(form.matvec, b, guess, tol, max_iter)
    true_res = float(np.linalg.norm(form.matvec(x) - b) / np.linalg.norm(b))
    report = SolveReport(its, true_res, time.perf_counter() - start)
    u = GridFunction(form.grid, x)
    if not ok:
        raise ConvergenceError(f"cg stalled at relative residual {true_res:.2e} after {its} iterations",
                               best=u, report=report)
    return u, report


@dataclass(frozen=True)
class EigenPair:
    """Smallest eigenpair with a certified gap.

    ``vector`` has unit L2 norm and nonnegative mean. ``residual`` is
    ``||T v - value v||`` in the discrete L2 norm. ``gap_estimate`` is a lower
    bound on ``lambda_2 - lambda_1`` taken from the second Ritz pair and its
    residual; it is positive when simplicity is certified.
    """

    value: float
    vector: GridFunction
    residual: float
    gap_estimate: float
    second_value: float
    iterations: int
    elapsed: float

    @property
    def gap_certified(self) -> bool:
        return self.gap_estimate > 0


def smallest_eigenpair(form: NonlocalForm, tol: float = 1e-10, *, block: int = 4,
                       cg_tol: float = 1e-12, max_outer: int = 400, seed: int = 0) -> EigenPair:
    """Smallest eigenpair by inverse subspace iteration with Rayleigh-Ritz.

    The first block column is the all-ones vector; the rest are seeded random
    vectors. Every sweep solves ``T W = V`` column by column with warm-started
    CG. Iteration stops once the a posteriori bound
    ``||r_1||**2 / (theta_2 - theta_1)`` on the eigenvalue error falls below
    ``tol * theta_1`` and the second Ritz pair is tight enough to certify the gap.
    """
    start = time.perf_counter()
    n = form.grid.size
    k = max(2, min(block, n))
    mass = form.grid.cell_volume
    rng = np.random.default_rng(seed)
    V = np.column_stack([np.ones(n)] + [rng.standard_normal(n) for _ in range(k - 1)])
    V, _ = qr(V, mode="economic")
    theta = np.ones(k)
    inner = np.full(k, 1e-4)

    if n <= k:
        return _dense_pair(form, start)

    for outer in range(1, max_outer + 1):
        W = np.empty_like(V)
        for j in range(k):
            b = V[:, j]
            guess = b / theta[j]
            W[:, j], *_ = _cg(form.matvec, b, guess, inner[j], 20000)
        Q, _ = qr(W, mode="economic")
        TQ = np.column_stack([form.matvec(Q[:, j]) for j in range(k)])
        H = Q.T @ TQ
        theta, Y = eigh(0.5 * (H + H.T))
        V = Q @ Y
        R = TQ @ Y - V * theta
        # Euclidean unit columns: L2 residual of the L2-normalized vector equals the Euclidean one.
        res = np.linalg.norm(R, axis=0)
        # inner accuracy tracks the outer residual; inexact solves only slow the sweep
        inner = np.clip(1e-2 * res / theta, cg_tol, 1e-4)
        gap = theta[1] - theta[0]
        err_bound = res[0] ** 2 / gap if gap > 0 else np.inf
        gap_lower = theta[1] - res[1] - theta[0]
        if err_bound <= tol * theta[0] and gap_lower > 0 and res[1] <= 1e-3 * theta[1]:
            break
    else:
        raise ConvergenceError(f"eigen iteration did not converge in {max_outer} sweeps "
                               f"(bound {err_bound:.2e})", best=GridFunction(form.grid, V[:, 0]))

    v = V[:, 0]
    if v.sum() < 0:
        v = -v
    vec = GridFunction(form.grid, v / np.sqrt(mass))
    # Rayleigh quotient of the returned vector, for exact consistency with the energy.
    value = form.energy(vec) / l2_inner(vec, vec)
    return EigenPair(float(value), vec, float(res[0]), float(gap_lower), float(theta[1]), outer,
                     time.perf_counter() - start)


def _dense_pair(form, start):
    n = form.grid.size
    T = np.column_stack([form.matvec(e) for e in np.eye(n)])
    vals, vecs = eigh(0.5 * (T + T.T))
    v = vecs[:, 0] * (1 if vecs[:, 0].sum() >= 0 else -1)
    vec = GridFunction(form.grid, v / np.sqrt(form.grid.cell_volume))
    gap = float(vals[1] - vals[0]) if n > 1 else np.inf
    second = float(vals[1]) if n > 1 else np.inf
    return EigenPair(float(vals[0]), vec, 0.0, gap, second, 0, time.perf_counter() - start)


def tensor_min_eigenvalue(lambda_x: float, lambda_t: float) -> float:
    """Smallest eigenvalue of ``A_x (x) I + I (x) A_t`` from those of its factors.

    The Kronecker sum has eigenvalues ``mu_i + nu_j``, so the smallest is the
    sum of the factor minima.
    """
    return float(lambda_x) + float(lambda_t)
