import json
import os

import pytest

from dfsrepeater import cli


def run(argv):
    return cli.main(argv)


def test_no_subcommand_prints_help(capsys):
    assert run([]) == cli.EXIT_USAGE
    assert "scan" in capsys.readouterr().out


def test_grid_parsing():
    assert cli._parse_grid("0:1:3").tolist() == [0.0, 0.5, 1.0]
    with pytest.raises(cli.UsageError):
        cli._parse_grid("0:1")
    with pytest.raises(cli.UsageError):
        cli._parse_grid("0:1:0")
    with pytest.raises(cli.UsageError):
        cli._parse_grid("a:b:c")


def test_knob_normalization():
    assert cli._normalize_knob("UoverJ") == "u_over_j"
    assert cli._normalize_knob("Uq1_over_J") == "uq1_over_j"
    assert cli._normalize_knob("residual_U_over_J") == "residual_u_over_j"
    with pytest.raises(cli.UsageError):
        cli._normalize_knob("temperature")


def test_scan_empty_grid_exits_2(capsys):
    assert run(["scan", "--gate", "rz", "--knob", "UoverJ",
                "--grid", "10:20:0"]) == cli.EXIT_USAGE


def test_scan_unknown_knob_exits_2():
    assert run(["scan", "--gate", "rz", "--knob", "Uq1_over_J",
                "--grid", "0:1:2"]) == cli.EXIT_USAGE


def test_scan_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code = run(["scan", "--gate", "rz", "--knob", "J2_over_J1",
                "--grid", "0:0.01:3", "--out", str(out), "--threads", "2"])
    assert code == cli.EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "j2_over_j1,infidelity,phase_error,leakage,status"
    assert len(lines) == 4
    assert all(line.endswith(",ok") for line in lines[1:])
    manifest = json.loads((tmp_path / "scan.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "scan"
    assert manifest["seed"] == 0
    assert "scan.csv" in manifest["outputs"]


def test_scan_reproducibility_and_thread_independence(tmp_path):
    outs = []
    for name, threads in (("a.csv", "1"), ("b.csv", "3")):
        out = tmp_path / name
        assert run(["scan", "--gate", "rz", "--knob", "J2_over_J1",
                    "--grid", "0:0.01:3", "--out", str(out),
                    "--threads", threads]) == cli.EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_output_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert run(["scan", "--gate", "rz", "--knob", "J2_over_J1",
                "--grid", "0:0.005:2", "--out", "envtest.csv"]) == cli.EXIT_OK
    assert (tmp_path / "envtest.csv").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[scan]\ngate = rz\nknob = J2_over_J1\n"
                   "grid = 0:0.01:5\nthreads = 1\n")
    out = tmp_path / "cfg.csv"
    # the --grid flag overrides the file's 5-point grid
    assert run(["--config", str(cfg), "scan", "--grid", "0:0.01:2",
                "--out", str(out)]) == cli.EXIT_OK
    assert len(out.read_text().splitlines()) == 3


def test_gate_times_requires_j(capsys):
    assert run(["gate-times", "--units", "na514"]) == cli.EXIT_USAGE
    assert "requires --J" in capsys.readouterr().err


def test_gate_times_table(tmp_path, capsys):
    out = tmp_path / "gt.json"
    code = run(["gate-times", "--units", "na514", "--J", "0.033",
                "--UoverJ", "75", "--gamma", "0.0136986301369863",
                "--out", str(out)])
    assert code == cli.EXIT_OK
    table = json.loads(out.read_text())
    ms = table["gate_times_ms"]
    assert ms["rz_pi_interacting"] == pytest.approx(8.7, rel=0.02)
    assert ms["cphase_free"] == pytest.approx(0.33, rel=0.02)
    budget = table["module_budget_ms"]
    assert budget["cnot"] == pytest.approx(28.0, abs=1.0)
    assert table["module_fidelities"]["ent_purification_bound"] == \
        pytest.approx(0.987, abs=5e-4)
    assert (tmp_path / "gt.json.manifest.json").exists()


def test_repeater_perfect_sources(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code = run(["repeater", "--F0", "1.0", "--out", str(out)])
    assert code == cli.EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["summary"]["final_fidelity"] == pytest.approx(1.0)
    assert payload["summary"]["converged"] is True


def test_repeater_nonconvergence_is_a_result(capsys):
    code = run(["repeater", "--F0", "0.3"])
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["summary"]["converged"] is False


def test_repeater_json_is_deterministic(tmp_path):
    texts = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        assert run(["repeater", "--F0", "0.8", "--levels", "2",
                    "--out", str(out)]) == cli.EXIT_OK
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_verify_unknown_suite_exits_2(capsys):
    assert run(["verify", "--suite", "everything"]) == cli.EXIT_USAGE


def test_verify_dfs_suite_passes(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert run(["verify", "--suite", "dfs", "--out", str(out)]) == cli.EXIT_OK
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert report["suites"][0]["suite"] == "dfs"
    assert all(c["passed"] for c in report["suites"][0]["checks"])
