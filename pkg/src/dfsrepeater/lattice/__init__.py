"""Two-species Bose-Hubbard simulator for the physical DFS gates."""
from .fock import (
    AncillaParams,
    FockBasis,
    HubbardParams,
    build_cphase_hamiltonian,
    build_hamiltonian,
    embed_qubit_chain,
    number_operator,
    product_state_index,
)
from .elimination import (
    EffectiveCouplings,
    EffectiveXResult,
    adiabatic_eliminate,
    effective_couplings,
    effective_x_hamiltonian,
)
from .units import LatticeUnits, na_514
from .gates import (
    CphaseResult,
    RxResult,
    RzResult,
    InitializationResult,
    find_cphase_time,
    gate_time,
    gate_time_internal,
    run_cphase,
    run_initialization,
    run_rx_gate,
    run_rz_gate,
)
from .closed_form import closed_form_free_evolution, free_pair_state
from .scans import ScanResult, detuning_scan

__all__ = [
    "AncillaParams", "FockBasis", "HubbardParams",
    "build_cphase_hamiltonian", "build_hamiltonian", "embed_qubit_chain",
    "number_operator", "product_state_index",
    "EffectiveCouplings", "EffectiveXResult", "adiabatic_eliminate",
    "effective_couplings", "effective_x_hamiltonian",
    "LatticeUnits", "na_514",
    "CphaseResult", "RxResult", "RzResult", "InitializationResult",
    "find_cphase_time", "gate_time", "gate_time_internal",
    "run_cphase", "run_initialization", "run_rx_gate", "run_rz_gate",
    "closed_form_free_evolution", "free_pair_state",
    "ScanResult", "detuning_scan",
]
