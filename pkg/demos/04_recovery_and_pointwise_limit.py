"""Recovery sequences u(x) phi(|t|^ell) and the pointwise limit of split energies.

Run: python demos/04_recovery_and_pointwise_limit.py
"""

from fraclap.harness import ExperimentConfig, run_gamma_pointwise, run_recovery


def main():
    rec = run_recovery(ExperimentConfig(experiment="recovery", s_values=[0.5], ell_values=[2, 8, 32, 128]))
    print("Recovery sequence, s = 0.5")
    print(f"{'ell':>5} {'|mean phi - 1|':>15} {'|grad phi|^2/ell':>17} {'E_k(phi)/ell^s':>15} {'I_ell':>10} {'I_inf':>10}")
    for c in rec.cells:
        print(f"{c['ell']:>5g} {c['mean_defect']:>15.5f} {c['grad_over_ell']:>17.4f} {c['energy_over_ell_s']:>15.4f} "
              f"{c['I_ell']:>10.5f} {c['I_inf']:>10.5f}")

    gp = run_gamma_pointwise(ExperimentConfig(experiment="gamma-pointwise", s_values=[0.5], samples=1))
    print("\nSplit energy of one random v decreasing to its slice average, s = 0.5")
    print(f"{'ell':>4} {'split':>12} {'full':>12} {'limit':>12} {'ell^2s (split - limit)':>24}")
    for c in gp.cells:
        print(f"{c['ell']:>4g} {c['E_tilde']:>12.4f} {c['E_scaled']:>12.4f} {c['E_tilde_inf']:>12.4f} "
              f"{c['t_part_scaled']:>24.10f}")


if __name__ == "__main__":
    main()
