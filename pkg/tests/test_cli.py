import json

from fraclap.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, main


def test_scaling_run_exits_zero_and_writes_reports(tmp_path, capsys):
    code = main(["scaling", "--s", "0.5", "--hx", "0.125", "--out", str(tmp_path), "--seed", "1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "scaling:" in out and "FAIL" not in out
    data = json.loads((tmp_path / "scaling.json").read_text())
    assert data["config"]["seed"] == 1 and data["config"]["s_values"] == [0.5]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"s_values": [0.25], "hx": 0.25, "ell_values": [1, 2]}))
    assert main(["scaling", "--config", str(cfg), "--s", "0.75", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "scaling.json").read_text())
    assert data["config"]["s_values"] == [0.75] and data["config"]["ell_values"] == [1.0, 2.0]


def test_failed_assertion_exits_two(capsys):
    # two short cylinders cannot reach the 4x error reduction
    assert main(["reduction", "--hx", "0.125", "--ell", "1", "2", "--quiet"]) == EXIT_FAILED
    assert "FAIL" in capsys.readouterr().out


def test_bad_configuration_exits_one(tmp_path, capsys):
    assert main(["scaling", "--s", "1.5"]) == EXIT_ERROR
    assert "error" in capsys.readouterr().err
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{\"bogus\": 1}")
    assert main(["scaling", "--config", str(cfg)]) == EXIT_ERROR
    assert main(["scaling", "--config", str(tmp_path / "missing.json")]) == EXIT_ERROR
