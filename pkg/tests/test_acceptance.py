"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test logs one PASS/FAIL line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""

import time

import pytest

from fraclap.harness import (ExperimentConfig, ExperimentReport, record_tensor_identities, run_forms_check,
                             run_gamma_pointwise, run_oracle, run_recovery, run_reduction, run_sandwich, run_scaling,
                             sandwich_cell)

S_VALUES = [0.25, 0.5, 0.75]


def timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def verdict(log, number, title, assertions, elapsed=None, budget=None, detail=""):
    failed = [a["name"] for a in assertions if not a["passed"]]
    in_time = budget is None or elapsed < budget
    ok = bool(assertions) and not failed and in_time
    timing = "" if elapsed is None else f", {elapsed:.1f}s" + (f" (budget {budget:.0f}s)" if budget else "")
    line = (f"CRITERION {number:>2} {title}: {'PASS' if ok else 'FAIL'} "
            f"[{len(assertions) - len(failed)}/{len(assertions)} checks{timing}]{detail}")
    log[f"{number} {title}"] = line
    print(line)
    return ok, failed, in_time


def select(rep, *prefixes):
    return [a for a in rep.assertions if a["name"].startswith(prefixes)]


@pytest.fixture(scope="module")
def forms_report():
    return timed(run_forms_check, ExperimentConfig(experiment="forms-check", s_values=S_VALUES, samples=200))


@pytest.fixture(scope="module")
def oracle_report():
    return timed(run_oracle, ExperimentConfig(experiment="oracle", s_values=S_VALUES))


def test_criterion_01_scaling_law(criterion_log):
    rep, t = timed(run_scaling, ExperimentConfig(experiment="scaling", s_values=S_VALUES, ell_values=[1, 2, 4]))
    checks = select(rep, "scaling")
    assert all(c["tolerance"] == 1e-10 for c in checks)
    worst = max(c["relative_error"] for c in checks)
    ok, failed, in_time = verdict(criterion_log, 1, "scaling law", checks, t, 30, f" max rel dev {worst:.1e}")
    assert not failed and in_time


def test_criterion_02_tensor_additivity(criterion_log):
    cfg = ExperimentConfig(experiment="sandwich", s_values=S_VALUES)
    rep = ExperimentReport(cfg)
    start = time.perf_counter()
    for s in S_VALUES:
        for ell in cfg.ell_values:
            record_tensor_identities(rep, sandwich_cell(s, ell, cfg, full=False), cfg)
    t = time.perf_counter() - start
    assert len(rep.assertions) == 2 * len(S_VALUES) * 4
    worst = max(a["relative_error"] for a in rep.assertions)
    ok, failed, in_time = verdict(criterion_log, 2, "tensor additivity", rep.assertions, t, 60,
                                  f" max rel dev {worst:.1e}")
    assert not failed and in_time


def test_criterion_03_sandwich(criterion_log):
    rep, t = timed(run_sandwich, ExperimentConfig(experiment="sandwich", s_values=S_VALUES))
    checks = select(rep, "lower bound", "upper bound", "gap below envelope", "gaps strictly decreasing")
    assert len(checks) == 3 * len(S_VALUES) * 4 + len(S_VALUES)
    ok, failed, in_time = verdict(criterion_log, 3, "sandwich", checks, t, 300)
    assert not failed and in_time
    # remaining invariants recorded by the same sweep
    assert rep.passed, rep.failures


def test_criterion_04_form_inequalities(criterion_log, forms_report):
    rep, t = forms_report
    checks = select(rep, "lower ", "upper ", "slice_x ", "slice_t ")
    assert all(c["tolerance"] == 1e-12 and c["vectors"] == 200 for c in checks)
    ok, failed, in_time = verdict(criterion_log, 4, "form inequalities", checks, t, 60)
    assert not failed and in_time


def test_criterion_05_averaging_chain(criterion_log, forms_report):
    rep, t = forms_report
    checks = select(rep, "jensen ", "chain ", "poincare ")
    assert all(c["tolerance"] == 1e-10 and c["vectors"] == 200 for c in checks)
    ok, failed, _ = verdict(criterion_log, 5, "averaging chain", checks)
    assert not failed


def test_criterion_06_dimension_reduction(criterion_log):
    rep, t = timed(run_reduction, ExperimentConfig(experiment="reduction", s_values=[0.5], ell_values=[1, 2, 4, 8]))
    checks = select(rep, "averages converge", "reduction factor", "minima converge")
    assert len(checks) == 3
    errs = [c["hs_error"] for c in rep.cells]
    ok, failed, in_time = verdict(criterion_log, 6, "dimension reduction", checks, t, 300,
                                  f" errors {', '.join(f'{e:.4f}' for e in errs)}")
    assert not failed and in_time


def test_criterion_07_recovery_estimates(criterion_log):
    rep, t = timed(run_recovery, ExperimentConfig(experiment="recovery", s_values=S_VALUES))
    checks = select(rep, "mean defect", "grad_over_ell", "energy_over_ell_s", "limsup")
    assert len(checks) == 5 * len(S_VALUES)
    ok, failed, in_time = verdict(criterion_log, 7, "recovery estimates", checks, t, 120)
    assert not failed and in_time


def test_criterion_08_gamma_pointwise(criterion_log):
    rep, t = timed(run_gamma_pointwise, ExperimentConfig(experiment="gamma-pointwise", s_values=S_VALUES))
    checks = select(rep, "t-part scaling", "squeeze")
    assert all(c["tolerance"] == 1e-12 for c in checks)
    ok, failed, _ = verdict(criterion_log, 8, "gamma-limit pointwise", checks, t)
    assert not failed


def test_criterion_09_oracles(criterion_log, oracle_report):
    rep, t = oracle_report
    checks = select(rep, "fft weights", "gaussian lattice energy", "local baseline", "gagliardo constant")
    assert len(checks) == 5 + len(S_VALUES) + 2 + 1
    ok, failed, in_time = verdict(criterion_log, 9, "oracles", checks, t, 60)
    assert not failed and in_time


def test_criterion_10_self_convergence(criterion_log, oracle_report):
    rep, _ = oracle_report
    checks = select(rep, "self-convergence")
    assert len(checks) == 1
    ok, failed, _ = verdict(criterion_log, 10, "self-convergence", checks,
                            detail=f" rel dev {checks[0]['relative_error']:.1e}")
    assert not failed
