import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclap import (BoxDomain, GridFunction, GridMismatchError, LatticeGrid, interval, interval_grid, l2_inner,
                     l2_norm, product_grid)


def test_interval_grid_nodes_and_spacing():
    g = LatticeGrid.from_spacing(interval(-1.0, 1.0), 1 / 32)
    assert g.shape == (63,)
    assert g.spacing == (1 / 32,)
    np.testing.assert_allclose(g.coords(0)[[0, 31, -1]], [-1 + 1 / 32, 0.0, 1 - 1 / 32], atol=1e-15)


def test_from_spacing_rejects_non_dividing_spacing():
    with pytest.raises(ValueError):
        LatticeGrid.from_spacing(interval(0.0, 1.0), 0.3)


def test_box_domain_validation():
    with pytest.raises(ValueError):
        BoxDomain((0.0,), (0.0,))
    with pytest.raises(ValueError):
        BoxDomain((0.0, 0.0), (1.0,))


def test_product_grid_is_x_major():
    g = product_grid(interval_grid(0, 1, 3), interval_grid(-2, 2, 5))
    assert g.shape == (3, 5)
    u = GridFunction.sample(g, lambda x, t: 10 * x + t)
    assert u.array[1, 0] == pytest.approx(10 * 0.5 + (-2 + 4 / 6))
    assert u.values[1] == u.array[0, 1]


def test_axis_mass_is_node_count_times_spacing():
    g = product_grid(interval_grid(0, 1, 3), LatticeGrid.from_spacing(interval(-4, 4), 0.5))
    assert g.axis_mass(-1) == pytest.approx(15 * 0.5)
    assert g.discrete_volume == pytest.approx(g.axis_mass(0) * g.axis_mass(1))


def test_scaled_grid_is_congruent():
    g = interval_grid(-1, 1, 7)
    big = g.scaled(4.0)
    assert big.shape == g.shape
    assert big.spacing[0] == pytest.approx(4 * g.spacing[0])


def test_grid_function_is_immutable_and_checked():
    g = interval_grid(0, 1, 4)
    u = GridFunction.constant(g, 2.0)
    with pytest.raises(ValueError):
        u.values[0] = 1.0
    with pytest.raises(GridMismatchError):
        GridFunction(g, np.ones(5))
    with pytest.raises(GridMismatchError):
        u + GridFunction.zeros(interval_grid(0, 1, 5))


def test_l2_inner_of_constant_is_node_mass():
    g = interval_grid(0, 1, 9)
    one = GridFunction.constant(g, 1.0)
    assert l2_inner(one, one) == pytest.approx(g.discrete_volume)
    assert l2_norm(3 * one) == pytest.approx(3 * np.sqrt(g.discrete_volume))


@given(st.lists(st.floats(-10, 10), min_size=6, max_size=6), st.lists(st.floats(-10, 10), min_size=6, max_size=6))
def test_l2_inner_symmetric_and_cauchy_schwarz(a, b):
    g = interval_grid(0, 2, 6)
    u, v = GridFunction(g, a), GridFunction(g, b)
    assert l2_inner(u, v) == pytest.approx(l2_inner(v, u))
    assert abs(l2_inner(u, v)) <= l2_norm(u) * l2_norm(v) * (1 + 1e-12) + 1e-300
