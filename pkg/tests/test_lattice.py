import numpy as np
import pytest

from dfsrepeater.core import ValidationError
from dfsrepeater.dfs import logical_basis_arrays
from dfsrepeater.lattice import (AncillaParams, FockBasis, HubbardParams,
                                 adiabatic_eliminate, build_cphase_hamiltonian,
                                 build_hamiltonian, closed_form_free_evolution,
                                 effective_couplings, embed_qubit_chain,
                                 gate_time, na_514, number_operator)
from dfsrepeater.lattice.elimination import minority_position_projector
from dfsrepeater.lattice.gates import _spectral


def test_fock_basis_dimension():
    # 2 atoms on 2 sites, summed over the three species sectors:
    # (2,0) and (0,2) give 3 states each, (1,1) gives 4
    basis = FockBasis.for_atoms(2, 2)
    assert basis.dim == 10
    # 2 atoms on 3 sites: 6 + 9 + 6
    basis3 = FockBasis.for_atoms(3, 2)
    assert basis3.dim == 21


def test_hamiltonian_is_hermitian_and_conserves_number():
    basis = FockBasis.for_atoms(3, 3)
    params = HubbardParams(J_a=(1.0, 0.7), J_b=(0.4, 1.1),
                           U_a=30.0, U_b=25.0, U_ab=28.0)
    H = build_hamiltonian(params, basis)
    assert np.allclose(H, H.conj().T)
    for species in (0, 1):
        N = number_operator(basis, species)
        assert np.allclose(H @ N - N @ H, 0.0, atol=1e-12)


def test_hubbard_params_validation():
    with pytest.raises(ValidationError):
        HubbardParams(J_a=(1.0,), J_b=(1.0, 1.0), U_a=1.0, U_b=1.0, U_ab=1.0)


def test_adiabatic_elimination_matches_closed_form():
    basis = FockBasis.for_atoms(3, 3)
    params = HubbardParams(J_a=(0.8, 1.2), J_b=(0.8, 1.2),
                           U_a=50.0, U_b=50.0, U_ab=40.0)
    H = build_hamiltonian(params, basis)
    P, idxs = minority_position_projector(basis, majority=0)
    Heff = adiabatic_eliminate(H, P)[np.ix_(idxs, idxs)]
    assert np.max(np.abs(Heff - effective_couplings(params).matrix())) < 1e-12


def test_exact_elimination_is_hermitian_on_block():
    basis = FockBasis.for_atoms(3, 3)
    params = HubbardParams(J_a=(1.0, 1.0), J_b=(1.0, 1.0),
                           U_a=40.0, U_b=40.0, U_ab=40.0)
    H = build_hamiltonian(params, basis)
    P, _ = minority_position_projector(basis, majority=0)
    Heff = adiabatic_eliminate(H, P, order="exact")
    assert np.allclose(Heff, Heff.conj().T, atol=1e-10)


def test_closed_form_agrees_with_numerics_at_one_time():
    zero, one = logical_basis_arrays()
    basis = FockBasis.for_atoms(3, 2)
    E = embed_qubit_chain(basis, [0, 2])
    H = build_hamiltonian(HubbardParams.uniform(3, (1.0, 1.0), 0.0), basis)
    U = _spectral(H)
    t = 1.37
    for which, state in (("cphase_zero", zero), ("cphase_one", one)):
        _, ref = closed_form_free_evolution(which, t)
        num = U(t) @ (E @ state.reshape(4, 4).T)
        assert np.max(np.abs(num - ref)) < 1e-10


def test_free_traversal_swap_time():
    zero, _ = logical_basis_arrays()
    t_swap = np.pi / np.sqrt(2)
    basis = FockBasis.for_atoms(3, 2)
    E = embed_qubit_chain(basis, [0, 2])
    start = E @ zero.reshape(4, 4).T
    _, psi = closed_form_free_evolution("cphase_zero", t_swap)
    overlap = abs(np.vdot(start, psi.reshape(start.shape)))
    assert overlap ** 2 == pytest.approx(1.0, abs=1e-10)


def test_cphase_hamiltonian_depends_on_ancilla_state():
    basis = FockBasis.for_atoms(3, 2)
    params = HubbardParams.uniform(3, (1.0, 1.0), 0.0)
    blocked = AncillaParams(site=1, U_q0=80.0, U_q1=0.0, sigma=0)
    passing = AncillaParams(site=1, U_q0=80.0, U_q1=0.0, sigma=1)
    H0 = build_cphase_hamiltonian(params, blocked, basis)
    H1 = build_cphase_hamiltonian(params, passing, basis)
    assert np.allclose(H0, H0.conj().T)
    assert not np.allclose(H0, H1)
    # the passing ancilla state adds no contact shift at all
    assert np.allclose(H1, build_hamiltonian(params, basis))


def test_gate_times_are_positive_and_ordered():
    units = na_514()
    t_free = gate_time("cphase_free", 0.033, 75.0, units)
    t_int = gate_time("cphase_interacting", 0.033, 75.0, units)
    assert 0 < t_free < t_int
    with pytest.raises(ValidationError):
        gate_time("not_a_gate", 0.033, 75.0, units)
