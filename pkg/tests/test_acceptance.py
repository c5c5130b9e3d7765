"""Acceptance gate: one test per top-level claim, each printing a single
pass/fail line with the measured margins.  The checks themselves live in
``dfsrepeater.verify`` so the command line report and this suite agree by
construction."""
import json

import pytest

from dfsrepeater import cli
from dfsrepeater import verify as V


@pytest.fixture(scope="module")
def dfs_suite():
    return {c.name: c for c in V.run_suite("dfs").checks}


@pytest.fixture(scope="module")
def lattice_suite():
    return {c.name: c for c in V.run_suite("lattice").checks}


@pytest.fixture(scope="module")
def noise_suite():
    return {c.name: c for c in V.run_suite("noise").checks}


@pytest.fixture(scope="module")
def protocol_suite():
    return {c.name: c for c in V.run_suite("protocol").checks}


def _report(number: int, title: str, checks):
    ok = all(c.passed for c in checks)
    margins = "; ".join(f"{c.name}={c.value:.3g}" for c in checks)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number} ({title}): {margins}")
    assert ok, "\n".join(c.line() for c in checks if not c.passed)


def test_criterion_01_dfs_certification(dfs_suite):
    _report(1, "DFS certification", [
        dfs_suite["collective_operators_annihilate"],
        dfs_suite["noise_evolution_invariance"],
    ])


def test_criterion_02_logical_algebra(dfs_suite):
    _report(2, "logical algebra", [
        dfs_suite["logical_x_maps_zero_to_one"],
        dfs_suite["logical_z_eigenstates"],
        dfs_suite["v34_equals_minus_z_on_block"],
    ])


def test_criterion_03_adiabatic_elimination(lattice_suite):
    _report(3, "adiabatic elimination", [
        lattice_suite["eliminated_block_matches_closed_form"],
        lattice_suite["effective_x_coupling_closed_form"],
        lattice_suite["logical_block_reduces_to_x_rotation"],
    ])


def test_criterion_04_free_evolution_closed_forms(lattice_suite):
    _report(4, "free-evolution closed forms", [
        lattice_suite["closed_form_matches_propagation"],
        lattice_suite["free_traversal_exact_swap"],
        lattice_suite["free_traversal_dfs_leakage"],
    ])


def test_criterion_05_rotation_gate_quality(lattice_suite):
    _report(5, "rotation gate quality", [
        lattice_suite["rz_stay_fidelity_one"],
        lattice_suite["rz_stay_fidelity_zero"],
        lattice_suite["rz_phase_accuracy"],
        lattice_suite["rx_fidelity"],
        lattice_suite["rz_free_mode_accuracy"],
    ])


def test_criterion_06_rotation_detuning_robustness(lattice_suite):
    _report(6, "rotation detuning robustness", [
        lattice_suite["rz_residual_hop_robustness"],
        lattice_suite["rz_interspecies_detuning_robustness"],
        lattice_suite["rx_hopping_detuning_robustness"],
        lattice_suite["rx_interspecies_detuning_robustness"],
    ])


def test_criterion_07_cphase_gate(lattice_suite):
    _report(7, "ancilla-controlled phase gate", [
        lattice_suite["cphase_blocked_probability"],
        lattice_suite["cphase_passing_state_shift"],
        lattice_suite["cphase_free_residual_interaction"],
        lattice_suite["cphase_free_passing_state_shift"],
        lattice_suite["cphase_spin_leakage"],
    ])


def test_criterion_08_gate_times(lattice_suite):
    _report(8, "physical gate times", [
        lattice_suite["gate_times_sodium_514"],
        lattice_suite["module_time_budget"],
    ])


def test_criterion_09_noise_formulas(noise_suite):
    _report(9, "dephasing fidelity formulas", [
        noise_suite["cphase_fidelity_formula"],
        noise_suite["cnot_fidelity_formula"],
        noise_suite["purification_fidelity_above_bound"],
        noise_suite["purification_bound_operating_point"],
        noise_suite["module_fidelities_operating_point"],
    ])


def test_criterion_10_protocol_properties(protocol_suite):
    _report(10, "protocol properties", [
        protocol_suite["pumping_fixed_point_below_one"],
        protocol_suite["purification_monotone_above_threshold"],
        protocol_suite["purification_recurrence_oracle"],
        protocol_suite["swap_restores_bell_state"],
        protocol_suite["circuits_match_ideal_oracles"],
        protocol_suite["physical_embedding_matches_model"],
    ])


def test_criterion_11_reproducibility(tmp_path, capsys):
    # identical config and seed give byte-identical data files
    payloads = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        csv = d / "scan.csv"
        assert cli.main(["scan", "--gate", "rz", "--knob", "J2_over_J1",
                         "--grid", "0:0.01:3", "--seed", "7",
                         "--out", str(csv)]) == cli.EXIT_OK
        rep = d / "rep.json"
        assert cli.main(["repeater", "--F0", "0.8", "--seed", "7",
                         "--out", str(rep)]) == cli.EXIT_OK
        payloads.append(csv.read_bytes() + rep.read_bytes())
        manifest = json.loads((d / "scan.csv.manifest.json").read_text())
        assert manifest["seed"] == 7
    same = payloads[0] == payloads[1]

    # the full verification suite must come back clean
    exit_code = cli.main(["verify", "--suite", "all"])
    capsys.readouterr()
    ok = same and exit_code == cli.EXIT_OK
    print(f"[{'PASS' if ok else 'FAIL'}] criterion 11 (reproducibility): "
          f"byte_identical={same}, verify_all_exit={exit_code}")
    assert same, "outputs differ between identical runs"
    assert exit_code == cli.EXIT_OK, "verify --suite all failed"
