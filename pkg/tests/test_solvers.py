import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import eigh

from fraclap import (ConvergenceError, GridFunction, LatticeGrid, NonlocalForm, cg_solve, interval, interval_grid,
                     l2_inner, l2_norm, local_baseline_lambda, product_grid, smallest_eigenpair,
                     tensor_min_eigenvalue)


def dense(form):
    n = form.grid.size
    return np.column_stack([form.matvec(e) for e in np.eye(n)])


def test_cg_solves_to_tolerance():
    g = LatticeGrid.from_spacing(interval(-1, 1), 1 / 16)
    form = NonlocalForm(g, 0.5)
    f = GridFunction.constant(g, 1.0)
    u, rep = cg_solve(form, f, tol=1e-12)
    assert rep.relative_residual <= 1e-12
    np.testing.assert_allclose(u.values, np.linalg.solve(dense(form), f.values), rtol=1e-10)
    # weak form: pairing(u, phi) = (f, phi)
    phi = GridFunction(g, np.random.default_rng(0).standard_normal(g.size))
    assert form.pairing(u, phi) == pytest.approx(l2_inner(f, phi), rel=1e-10)


def test_cg_zero_rhs_and_budget():
    g = interval_grid(-1, 1, 31)
    form = NonlocalForm(g, 0.5)
    u, rep = cg_solve(form, GridFunction.zeros(g))
    assert rep.iterations == 0 and not np.any(u.values)
    with pytest.raises(ConvergenceError) as info:
        cg_solve(form, GridFunction.constant(g, 1.0), tol=1e-14, max_iter=2)
    assert info.value.best is not None and info.value.report.iterations == 2


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_eigenpair_matches_dense_solver(s):
    g = product_grid(interval_grid(-1, 1, 9), interval_grid(-2, 2, 11))
    form = NonlocalForm(g, s)
    pair = smallest_eigenpair(form, 1e-12)
    vals = eigh(dense(form), eigvals_only=True)
    assert pair.value == pytest.approx(vals[0], rel=1e-11)
    assert pair.gap_certified and pair.gap_estimate <= vals[1] - vals[0] + 1e-10
    assert pair.vector.values.min() > 0
    assert l2_norm(pair.vector) == pytest.approx(1.0, rel=1e-12)
    assert abs(form.energy(pair.vector) / l2_inner(pair.vector, pair.vector) - pair.value) <= 10 * 1e-12 * pair.value


def test_local_baseline_eigenvalue_closed_form():
    g = LatticeGrid.from_spacing(interval(-1, 1), 0.01)
    pair = smallest_eigenpair(NonlocalForm(g, 1.0), 1e-13)
    assert pair.value == pytest.approx(local_baseline_lambda(g), rel=1e-12)
    assert pair.value == pytest.approx(np.pi**2 / 4, rel=1e-4)


@given(st.floats(0.1, 0.9))
def test_tensor_form_eigenvalue_is_sum_of_factor_eigenvalues(s):
    gx, gt = interval_grid(-1, 1, 7), interval_grid(-3, 3, 9)
    g = product_grid(gx, gt)
    lam = smallest_eigenpair(NonlocalForm(g, s, "tensor"), 1e-12).value
    lx = smallest_eigenpair(NonlocalForm(gx, s), 1e-12).value
    lt = smallest_eigenpair(NonlocalForm(gt, s), 1e-12).value
    assert lam == pytest.approx(tensor_min_eigenvalue(lx, lt), rel=1e-10)


def test_eigenvalue_decreases_as_the_cylinder_grows():
    gx = interval_grid(-1, 1, 7)
    vals = [smallest_eigenpair(NonlocalForm(product_grid(gx, LatticeGrid.from_spacing(interval(-L, L), 0.25)), 0.5),
                               1e-12).value for L in (1, 2, 4)]
    assert vals[0] > vals[1] > vals[2]


def test_tiny_grid_uses_dense_path():
    pair = smallest_eigenpair(NonlocalForm(interval_grid(0, 1, 2), 0.5))
    assert pair.iterations == 0 and pair.vector.values.min() > 0
