"""Lattice weights, their closed form, and energies of smooth functions.

Run: python demos/01_weights_and_energies.py
"""

import math

import numpy as np

from fraclap import (GridFunction, LatticeGrid, NonlocalForm, closed_form_weights_1d, compute_weights,
                     fourier_energy, gaussian, interval)


def main():
    print("Stencil weights at s = 0.5 against the Gamma-ratio closed form")
    w = compute_weights(0.5, 1.0, 64)
    for m in (0, 1, 2, 8, 64):
        print(f"  m={m:>2}  lattice {w.weight(m): .15f}  closed form {closed_form_weights_1d(0.5, m): .15f}")
    print(f"  far-field mass beyond radius 64: {w.retained_sum:.3e}")

    print("\nEnergy of exp(-x^2/2): lattice (h = 0.05 on (-12, 12)) vs Fourier quadrature vs Gamma(s + 1/2)")
    grid = LatticeGrid.from_spacing(interval(-12.0, 12.0), 0.05)
    u = GridFunction.sample(grid, gaussian().evaluate)
    for s in (0.25, 0.5, 0.75, 1.0):
        lattice = NonlocalForm(grid, s).energy(u)
        print(f"  s={s:4}  lattice {lattice:.8f}  fourier {fourier_energy(gaussian(), s):.8f}  "
              f"exact {math.gamma(s + 0.5):.8f}")

    print("\nWeights decay like |m|^(-1-2s):")
    m = np.array([8, 16, 32, 64])
    for s in (0.25, 0.75):
        w = np.abs(compute_weights(s, 1.0, 64).weights[64 + m])
        slopes = np.diff(np.log(w)) / np.diff(np.log(m))
        print(f"  s={s}: log-log slopes {np.round(slopes, 3)}  (expected {-1 - 2 * s})")


if __name__ == "__main__":
    main()
