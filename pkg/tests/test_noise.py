import numpy as np
import pytest

from dfsrepeater.core import ValidationError
from dfsrepeater.noise import (DephasingModel, QuantumOperation,
                               analytic_module_fidelity, lindblad_channel,
                               lindblad_propagate, operation_fidelity,
                               phase_damping, state_fidelity)

_Z = np.diag([1.0, -1.0])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_dephasing_model_validation_and_flip_probability():
    with pytest.raises(ValidationError):
        DephasingModel(-0.1, 1.0)
    m = DephasingModel(2.0, 0.5)
    assert m.gamma_t == pytest.approx(1.0)
    assert m.flip_probability() == pytest.approx((1 - np.exp(-1.0)) / 2)


def test_operation_from_unitary_round_trip():
    U = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    op = QuantumOperation.from_unitary(U)
    rho = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
    assert np.allclose(op(rho), U @ rho @ U.conj().T)
    assert op.is_trace_preserving()
    assert op.is_completely_positive()


def test_phase_damping_kills_coherences():
    gt = 0.8
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = phase_damping(gt)(rho)
    assert out[0, 0] == pytest.approx(0.5)
    assert out[0, 1] == pytest.approx(0.5 * np.exp(-gt))


def test_lindblad_channel_matches_kraus_dephasing():
    gt = 0.35
    C = np.sqrt(gt / 2) * _Z
    chan = lindblad_channel(np.zeros((2, 2)), [C], 1.0)
    ref = phase_damping(gt)
    assert np.max(np.abs(chan.matrix - ref.matrix)) < 1e-12


def test_lindblad_propagate_with_hamiltonian():
    # free precession under X with dephasing along Z
    H = 0.5 * _X
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    model = DephasingModel(0.4, 1.3)
    out = lindblad_propagate(rho0, H, model).matrix
    assert np.trace(out).real == pytest.approx(1.0)
    ws = np.linalg.eigvalsh(out)
    assert ws.min() > -1e-12


def test_state_fidelity_pure_and_mixed():
    psi = np.array([1.0, 0.0])
    phi = np.array([1.0, 1.0]) / np.sqrt(2)
    assert state_fidelity(np.outer(psi, psi), np.outer(phi, phi)) == \
        pytest.approx(0.5)
    rho = np.eye(2) / 2
    assert state_fidelity(rho, rho) == pytest.approx(1.0)


def test_operation_fidelity_of_dephasing():
    gt = 0.2
    ideal = QuantumOperation.identity(2)
    noisy = phase_damping(gt)
    fmin = operation_fidelity(ideal, noisy, n_samples=300, seed=1)
    # worst case is an equator state: F = (1 + e^{-gamma t}) / 2
    assert fmin.value == pytest.approx((1 + np.exp(-gt)) / 2, abs=1e-6)


def test_analytic_module_fidelities():
    gt = 0.1
    e = np.exp(-gt)
    assert float(analytic_module_fidelity("cphase", gt)) == \
        pytest.approx((1 + e) / 2)
    assert float(analytic_module_fidelity("cnot", gt)) == \
        pytest.approx(((1 + e) / 2) ** 2)
    st = analytic_module_fidelity("state_transfer", gt)
    assert float(st) == pytest.approx((1 + np.exp(-2 * gt)) * (1 + e) / 4)
    assert not st.is_bound
    ep = analytic_module_fidelity("ent_purification", gt)
    assert ep.is_bound
    assert float(ep) == pytest.approx(1 - (1.5 + np.sqrt(2)) * gt)
    with pytest.raises(ValidationError):
        analytic_module_fidelity("swap", gt)


def test_fidelities_decrease_with_noise():
    for module in ("cphase", "cnot", "state_transfer"):
        vals = [float(analytic_module_fidelity(module, gt))
                for gt in (0.0, 0.1, 0.5)]
        assert vals[0] == pytest.approx(1.0)
        assert vals[0] > vals[1] > vals[2]
