import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclap import (GridFunction, GridMismatchError, LatticeGrid, NonlocalForm, interval, interval_grid, l2_inner,
                     product_grid, scaled_energy, slice_energy_sum, stretched_grid)
from fraclap.forms import default_radius


def small_product(nx=7, nt=9, lx=1.0, lt=2.0):
    return product_grid(interval_grid(-lx, lx, nx), interval_grid(-lt, lt, nt))


def random_function(grid, seed):
    return GridFunction(grid, np.random.default_rng(seed).standard_normal(grid.size))


@pytest.mark.parametrize("kind", ["full", "tensor", "slice_x", "slice_t"])
def test_fft_and_direct_products_agree(kind):
    g = small_product()
    fast = NonlocalForm(g, 0.6, kind)
    slow = NonlocalForm(g, 0.6, kind, matvec="direct")
    u = random_function(g, 1).values
    np.testing.assert_allclose(fast.matvec(u), slow.matvec(u), rtol=1e-12, atol=1e-12)


def test_operator_is_symmetric_and_pairing_matches_apply():
    g = small_product()
    form = NonlocalForm(g, 0.3)
    u, v = random_function(g, 2), random_function(g, 3)
    assert form.pairing(u, v) == pytest.approx(form.pairing(v, u), rel=1e-12)
    assert l2_inner(form.apply(u), v) == pytest.approx(form.pairing(u, v), rel=1e-12)


def test_tensor_energy_is_sum_of_slice_energies():
    g = small_product()
    u = random_function(g, 4)
    total = NonlocalForm(g, 0.45, "tensor").energy(u)
    assert total == pytest.approx(slice_energy_sum(0.45, u, "x") + slice_energy_sum(0.45, u, "t"), rel=1e-13)


def test_slice_energy_integrates_one_dimensional_energies():
    g = small_product()
    u = random_function(g, 5)
    gx, gt = g.axis_grid(0), g.axis_grid(1)
    fx = NonlocalForm(gx, 0.7)
    expect = sum(fx.energy(GridFunction(gx, u.array[:, j])) for j in range(g.shape[1])) * gt.spacing[0]
    assert slice_energy_sum(0.7, u, "x") == pytest.approx(expect, rel=1e-12)


def test_separable_function_slice_energy_factorizes():
    g = small_product()
    a = np.linspace(1, 2, g.shape[0])
    one = np.ones(g.shape[1])
    u = GridFunction(g, np.outer(a, one))
    gx, gt = g.axis_grid(0), g.axis_grid(1)
    e_t = NonlocalForm(gt, 0.5).energy(GridFunction(gt, one))
    assert slice_energy_sum(0.5, u, "t") == pytest.approx(e_t * np.sum(a**2) * gx.spacing[0], rel=1e-12)


@given(st.floats(0.05, 0.95), st.integers(0, 10_000))
def test_split_energy_sandwiches_full_energy(s, seed):
    # 2^(s-1) E_split <= E <= E_split and each slice energy <= E
    g = small_product(5, 6)
    u = random_function(g, seed)
    e = NonlocalForm(g, s).energy(u)
    ex, et = slice_energy_sum(s, u, "x"), slice_energy_sum(s, u, "t")
    tol = 1e-12 * max(e, ex + et)
    assert 2 ** (s - 1) * (ex + et) <= e + tol
    assert e <= ex + et + tol
    assert max(ex, et) <= e + tol


def test_local_energy_is_dirichlet_difference_sum():
    g = interval_grid(0, 1, 9)
    u = random_function(g, 6)
    h = g.spacing[0]
    ext = np.concatenate([[0.0], u.values, [0.0]])
    expect = np.sum(np.diff(ext) ** 2) / h
    assert NonlocalForm(g, 1.0).energy(u) == pytest.approx(expect, rel=1e-12)


def test_energy_of_zero_vector_and_positivity():
    g = small_product()
    for kind in ("full", "tensor", "slice_x", "slice_t"):
        form = NonlocalForm(g, 0.5, kind)
        assert form.energy(GridFunction.zeros(g)) == 0.0
        assert form.energy(random_function(g, 7)) > 0


def test_default_radius_reaches_every_pair():
    assert default_radius((7, 9)) == (6, 8)
    g = interval_grid(-1, 1, 11)
    exact = NonlocalForm(g, 0.5).energy(random_function(g, 8))
    longer = NonlocalForm(g, 0.5, radius=40).energy(random_function(g, 8))
    assert exact == pytest.approx(longer, rel=1e-13)


def test_kind_validation():
    with pytest.raises(GridMismatchError):
        NonlocalForm(interval_grid(0, 1, 5), 0.5, "tensor")
    with pytest.raises(ValueError):
        NonlocalForm(small_product(), 0.5, "diagonal")
    with pytest.raises(GridMismatchError):
        NonlocalForm(small_product(), 0.5).energy(GridFunction.zeros(interval_grid(0, 1, 5)))


def test_scaled_energy_uses_stretched_grid_and_section_mass():
    unit = product_grid(interval_grid(-1, 1, 5), LatticeGrid.from_spacing(interval(-1, 1), 0.25))
    u = random_function(unit, 9)
    ell = 3.0
    big = stretched_grid(unit, ell)
    assert big.spacing[1] == pytest.approx(0.75)
    direct = NonlocalForm(big, 0.4).energy(GridFunction(big, u.values)) / (7 * 0.75)
    assert scaled_energy(0.4, unit, ell, u) == pytest.approx(direct, rel=1e-13)


@given(st.floats(0.05, 0.95), st.floats(0.2, 5.0))
def test_energy_scales_under_grid_dilation(s, c):
    # E on c*grid equals c^(d-2s) E on grid for the same nodal values
    g = small_product(5, 5)
    u = random_function(g, 10)
    big = g.scaled(c)
    e = NonlocalForm(g, s).energy(u)
    assert NonlocalForm(big, s).energy(GridFunction(big, u.values)) == pytest.approx(c ** (2 - 2 * s) * e, rel=1e-10)


def test_apply_local_baseline_is_tridiagonal():
    g = interval_grid(0, 1, 9)
    h = g.spacing[0]
    e = np.zeros(9)
    e[4] = 1.0
    out = NonlocalForm(g, 1.0).apply(GridFunction(g, e)).values
    np.testing.assert_allclose(out[3:6], np.array([-1, 2, -1]) / h**2, rtol=1e-12)
    assert np.count_nonzero(np.abs(out) > 1e-9) == 3


def test_single_node_energy_is_center_weight():
    # pairing(e_j, e_j) = h^(d-2s) w_0 = 4/pi at s = 1/2, h = 1
    g = interval_grid(-20, 20, 39)
    e = np.zeros(39)
    e[19] = 1.0
    u = GridFunction(g, e)
    assert g.spacing[0] == 1.0
    assert NonlocalForm(g, 0.5).pairing(u, u) == pytest.approx(4 / np.pi, rel=1e-12)
    assert NonlocalForm(g, 0.5).apply(GridFunction.zeros(g)).values.max() == 0.0


def test_one_slab_product_grid():
    g = product_grid(interval_grid(-1, 1, 5), interval_grid(-1, 1, 1))
    assert g.shape == (5, 1) and g.size == 5
    u = random_function(g, 11)
    assert NonlocalForm(g, 0.5).energy(u) > 0
