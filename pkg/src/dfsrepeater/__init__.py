"""Simulator and verification suite for a quantum repeater whose logical
qubits live in a four-atom decoherence-free subspace, with gates realized
by controlled exchange of atoms in a two-species optical lattice."""

__version__ = "0.1.0"

from .core import (CapacityError, DensityMatrix, Operator, StateVector,
                   ValidationError, expm_hermitian, partial_trace, propagate,
                   random_pure_state, tensor)
from .dfs import (DfsCodec, NoiseField, collective_noise_hamiltonian,
                  dfs_projector_array, leakage, logical_basis_arrays,
                  logical_rotation, logical_X, logical_Z, permutation_array)
from .noise import (DephasingModel, ModuleFidelity, QuantumOperation,
                    analytic_module_fidelity, lindblad_channel,
                    lindblad_propagate, operation_fidelity, phase_damping,
                    state_fidelity)
from .protocol import (LogicalPair, ProtocolConfig, RepeaterResult,
                       bell_state, circuit_cnot_logical,
                       circuit_measure_logical, circuit_purification_round,
                       circuit_state_transfer, circuit_state_transfer_logical,
                       entanglement_swap, gate_time_budget, module_operation,
                       nested_repeater_run, werner_state)
from .verify import run_suite, run_suites, SUITES

__all__ = [
    "__version__",
    "CapacityError", "DensityMatrix", "Operator", "StateVector",
    "ValidationError", "expm_hermitian", "partial_trace", "propagate",
    "random_pure_state", "tensor",
    "DfsCodec", "NoiseField", "collective_noise_hamiltonian",
    "dfs_projector_array", "leakage", "logical_basis_arrays",
    "logical_rotation", "logical_X", "logical_Z", "permutation_array",
    "DephasingModel", "ModuleFidelity", "QuantumOperation",
    "analytic_module_fidelity", "lindblad_channel", "lindblad_propagate",
    "operation_fidelity", "phase_damping", "state_fidelity",
    "LogicalPair", "ProtocolConfig", "RepeaterResult", "bell_state",
    "circuit_cnot_logical", "circuit_measure_logical",
    "circuit_purification_round", "circuit_state_transfer",
    "circuit_state_transfer_logical", "entanglement_swap",
    "gate_time_budget", "module_operation", "nested_repeater_run",
    "werner_state",
    "run_suite", "run_suites", "SUITES",
]
