"""Cylinder solutions collapse onto the section problem as the cylinder grows.

Solves the Dirichlet problem with a t-independent load on omega x (-ell, ell),
averages over the axial section and compares with the section solution.

Run: python demos/03_dimension_reduction.py
"""

import math

from fraclap import LatticeGrid, LoadSpec, interval, reduction_error, solve_dirichlet_cylinder, solve_dirichlet_section
from fraclap.reduction import functional_I, minimum_value


def main():
    s = 0.5
    omega = LatticeGrid.from_spacing(interval(-1.0, 1.0), 1 / 32)
    load = LoadSpec(profile="one")
    u_inf = solve_dirichlet_section(s, omega, load.f_inf(s, omega), 1e-12)
    m_inf = functional_I(s, math.inf, u_inf, load)
    print(f"section minimum M_inf = {m_inf:.6f}")
    print(f"{'ell':>4} {'H^s error':>10} {'L2 error':>10} {'|M_ell - M_inf|':>16}")
    for ell in (1, 2, 4, 8):
        u = solve_dirichlet_cylinder(s, omega, ell, 1 / 32, load, 1e-12)
        hs, l2 = reduction_error(s, u, u_inf)
        print(f"{ell:>4} {hs:>10.5f} {l2:>10.5f} {abs(minimum_value(s, u, ell, load) - m_inf):>16.5f}")


if __name__ == "__main__":
    main()
