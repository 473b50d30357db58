"""First eigenvalue of a growing cylinder, squeezed between two bounds.

The section is omega = (-1, 1) and the cylinder is omega x (-ell, ell). As
ell grows the eigenvalue falls toward the section eigenvalue, never below it,
and the excess stays under the envelope lambda(B_1) / ell^(2s).

Run: python demos/02_eigenvalue_sandwich.py
"""

from fraclap.harness import ExperimentConfig, run_sandwich


def main():
    cfg = ExperimentConfig(experiment="sandwich", s_values=[0.5], ell_values=[1, 2, 4], hx=1 / 16)
    rep = run_sandwich(cfg)
    print(f"{'ell':>4} {'lambda(omega)':>14} {'lambda(cyl)':>12} {'gap':>10} {'envelope':>10}")
    for c in rep.cells:
        print(f"{c['ell']:>4g} {c['lambda_omega']:>14.8f} {c['lambda_Omega']:>12.8f} {c['gap']:>10.6f} "
              f"{c['envelope']:>10.6f}")
    print(f"\n{len(rep.assertions) - len(rep.failures)}/{len(rep.assertions)} assertions passed")


if __name__ == "__main__":
    main()
