import numpy as np
import pytest

from dfsrepeater.core import ValidationError
from dfsrepeater.noise import DephasingModel, state_fidelity
from dfsrepeater.protocol import (LogicalPair, ProtocolConfig, bell_state,
                                  circuit_measure_logical,
                                  circuit_purification_round,
                                  circuit_state_transfer,
                                  circuit_state_transfer_logical,
                                  entanglement_swap, gate_time_budget,
                                  module_operation, nested_repeater_run,
                                  werner_state)
from dfsrepeater.lattice import na_514

QUIET = DephasingModel(0.0, 1.0)


def test_bell_states_are_orthonormal():
    B = np.stack([bell_state(k) for k in range(4)])
    assert np.allclose(B @ B.conj().T, np.eye(4), atol=1e-14)
    with pytest.raises(ValidationError):
        bell_state(4)


def test_werner_state_fidelity_parameter():
    for F in (0.25, 0.6, 1.0):
        pair = LogicalPair(werner_state(F))
        assert pair.fidelity == pytest.approx(F)
    with pytest.raises(ValidationError):
        werner_state(1.2)


def test_state_transfer_is_faithful_without_noise():
    rng = np.random.default_rng(2)
    for _ in range(4):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi = z / np.linalg.norm(z)
        rho, _ = circuit_state_transfer(psi, QUIET)
        assert state_fidelity(rho, np.outer(psi, psi.conj())) == \
            pytest.approx(1.0, abs=1e-12)
        rho2, _ = circuit_state_transfer_logical(psi, QUIET)
        assert state_fidelity(rho2, np.outer(psi, psi.conj())) == \
            pytest.approx(1.0, abs=1e-12)


def test_transfer_degrades_under_dephasing():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    rho, _ = circuit_state_transfer(plus, DephasingModel(1.0, 0.5))
    f = state_fidelity(rho, np.outer(plus, plus.conj()))
    assert f == pytest.approx((1 + np.exp(-0.5)) / 2, abs=1e-10)


def test_logical_measurement_follows_born_rule():
    psi = np.array([np.sqrt(0.3), np.sqrt(0.7)], dtype=complex)
    rec = circuit_measure_logical(psi, QUIET)
    assert rec.probabilities[0] == pytest.approx(0.3, abs=1e-12)
    assert rec.probabilities[1] == pytest.approx(0.7, abs=1e-12)


def test_module_operations_are_channels():
    for module in ("transfer", "cphase", "cnot"):
        for gt in (0.0, 0.3):
            op = module_operation(module, gt)
            assert op.is_trace_preserving(atol=1e-9)
            assert op.is_completely_positive(atol=1e-9)


def test_purification_improves_werner_pairs():
    pair = LogicalPair(werner_state(0.75))
    aux = LogicalPair(werner_state(0.75))
    out = circuit_purification_round(pair, aux, QUIET)
    assert out.pair.fidelity > 0.75
    assert 0.0 < out.p_success <= 1.0


def test_purification_matches_recurrence():
    F = 0.8
    pair = LogicalPair(werner_state(F))
    out = circuit_purification_round(pair, LogicalPair(pair.rho.copy()), QUIET)
    num = F ** 2 + (1 - F) ** 2 / 9
    den = F ** 2 + 2 * F * (1 - F) / 3 + 5 * (1 - F) ** 2 / 9
    assert out.pair.fidelity == pytest.approx(num / den, abs=1e-12)
    assert out.p_success == pytest.approx(den, abs=1e-12)


def test_swap_of_perfect_pairs_and_middle_node_check():
    phi = np.outer(bell_state(0), bell_state(0).conj())
    res = entanglement_swap(LogicalPair(phi, ("A", "M")),
                            LogicalPair(phi, ("M", "B")), QUIET)
    assert res.pair.fidelity == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        entanglement_swap(LogicalPair(phi, ("A", "M")),
                          LogicalPair(phi, ("X", "B")), QUIET)


def test_protocol_config_validation():
    with pytest.raises(ValidationError):
        ProtocolConfig(source_fidelity=0.0)
    with pytest.raises(ValidationError):
        ProtocolConfig(source_fidelity=0.9, aux_strategy="other")


def test_repeater_run_perfect_sources():
    res = nested_repeater_run(ProtocolConfig(source_fidelity=1.0, levels=2))
    assert res.converged
    assert res.final_fidelity == pytest.approx(1.0, abs=1e-10)
    assert res.rounds_total == 0


def test_repeater_run_below_threshold_flags_nonconvergence():
    res = nested_repeater_run(ProtocolConfig(source_fidelity=0.3, f_min=0.9))
    assert not res.converged


def test_repeater_trace_structure():
    res = nested_repeater_run(ProtocolConfig(source_fidelity=0.8, levels=2,
                                             f_min=0.95))
    assert len(res.trace) == 2
    assert res.trace[0].fidelity_swapped is not None
    assert res.trace[1].fidelity_swapped is None
    assert res.final_fidelity >= 0.9


def test_gate_time_budget_composition():
    budget = gate_time_budget(na_514())
    assert set(budget) == {"transfer", "purification", "cnot", "readout"}
    assert budget["transfer"] == pytest.approx(budget["readout"])
    assert budget["cnot"] > 2 * budget["transfer"]
