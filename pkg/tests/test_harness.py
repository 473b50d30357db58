import csv
import json

import pytest

from fraclap.harness import (ConfigError, ExperimentConfig, ExperimentReport, check_congruent, richardson_pair,
                             run_experiment, run_forms_check, run_gamma_pointwise, run_reduction, run_scaling,
                             strip_timings, write_outputs)
from fraclap.lattice import interval_grid


def small(experiment, **kw):
    base = dict(experiment=experiment, hx=0.125, s_values=[0.5])
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_defaults_per_experiment():
    assert ExperimentConfig(experiment="sandwich").ell_values == [1, 2, 4, 8]
    assert ExperimentConfig(experiment="scaling").ell_values == [1, 2, 4]
    assert ExperimentConfig(experiment="reduction").s_values == [0.5]
    cfg = ExperimentConfig(experiment="scaling", hx=0.25)
    assert cfg.ht == 0.25 and cfg.tolerances["identity"] == 1e-10


@pytest.mark.parametrize("bad", [
    dict(experiment="nope"),
    dict(s_values=[1.0]),
    dict(s_values=[0.0]),
    dict(ell_values=[2, 1]),
    dict(ell_values=[0, 1]),
    dict(hx=-1.0),
    dict(tolerances={"unknown": 1.0}),
    dict(load={"profile": "one", "shape": 2}),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_file_round_trip_and_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "scaling", "s_values": [0.3], "hx": 0.25}))
    cfg = ExperimentConfig.from_file(path, seed=5)
    assert cfg.s_values == [0.3] and cfg.seed == 5 and cfg.hx == 0.25
    path.write_text(json.dumps({"experiment": "scaling", "colour": "red"}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)


def test_grid_that_does_not_fit_is_a_config_error():
    with pytest.raises(ConfigError):
        run_scaling(small("scaling", hx=0.3))


def test_congruence_check():
    check_congruent([interval_grid(0, 1, 5), interval_grid(0, 2, 5)])
    with pytest.raises(ConfigError):
        check_congruent([interval_grid(0, 1, 5), interval_grid(0, 2, 6)])


def test_inequality_records_slack_and_degeneracy():
    rep = ExperimentReport(small("scaling"))
    assert rep.inequality("a", "x <= y", 1.0, 2.0, 1e-12)
    assert rep.inequality("b", "x <= y", 1.0, 1.0 - 1e-14, 1e-12)
    assert not rep.inequality("c", "x <= y", 2.0, 1.0, 1e-12)
    a, b, c = rep.assertions
    assert a["slack"] == 1.0 and not a["degenerate"]
    assert b["degenerate"] and b["passed"]
    assert not c["passed"] and rep.failures == [c]


def test_scaling_report_passes_with_baseline():
    rep = run_scaling(small("scaling", baseline=True))
    assert rep.passed
    assert {c["s"] for c in rep.cells} == {0.5, 1.0}
    assert any(a["name"] == "local baseline closed form" for a in rep.assertions)


def test_reports_are_deterministic_apart_from_timings(tmp_path):
    a = run_forms_check(small("forms-check", samples=6, ell_values=[1, 2])).to_dict()
    b = run_forms_check(small("forms-check", samples=6, ell_values=[1, 2])).to_dict()
    assert json.dumps(strip_timings(a), sort_keys=True) == json.dumps(strip_timings(b), sort_keys=True)


def test_thread_pool_gives_identical_cells(monkeypatch):
    cfg = small("gamma-pointwise", s_values=[0.3, 0.6], samples=2)
    serial = strip_timings(run_gamma_pointwise(cfg).to_dict())
    monkeypatch.setenv("FRACLAP_THREADS", "4")
    pooled = strip_timings(run_gamma_pointwise(cfg).to_dict())
    assert serial == pooled


def test_every_assertion_carries_a_reference():
    rep = run_reduction(small("reduction", ell_values=[1, 2, 4, 8]))
    assert rep.assertions and all(a["reference"] and a["name"] for a in rep.assertions)


def test_outputs_written(tmp_path):
    cfg = small("scaling", out=str(tmp_path))
    rep = run_experiment(cfg)
    data = json.loads((tmp_path / "scaling.json").read_text(encoding="utf-8"))
    assert data["schema_version"] == "1.0" and data["summary"]["passed"] == rep.passed
    assert list(data) == sorted(data)
    with open(tmp_path / "scaling.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "ell", "nodes", "h", "lambda", "scaled_lambda"]
    assert len(rows) == 1 + len(rep.cells)
    assert float(rows[1][4]) == rep.cells[0]["lambda"]


def test_sandwich_csv_columns(tmp_path):
    from fraclap.harness import CSV_COLUMNS
    assert CSV_COLUMNS["sandwich"] == ["s", "ell", "hx", "ht", "lambda_omega", "lambda_B1", "lambda_Omega",
                                       "lower_slack", "upper_slack", "gap", "envelope"]


def test_small_sandwich_passes(tmp_path):
    from fraclap.harness import run_sandwich
    rep = run_sandwich(small("sandwich", hx=0.125, ell_values=[1, 2, 4]))
    assert rep.passed, rep.failures
    paths = write_outputs(rep, tmp_path)
    assert [p.name for p in paths] == ["sandwich.json", "sandwich.csv"]


def test_richardson_pair_exact_for_first_order_error():
    vals = [1 + 0.5, 1 + 0.25, 1 + 0.125]
    assert richardson_pair(vals) == (1.0, 1.0)
