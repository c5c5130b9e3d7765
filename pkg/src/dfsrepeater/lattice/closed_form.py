"""Closed-form free-mode evolution, built from single-particle propagators.

With all on-site interactions switched off the two mobile atoms evolve
independently, so the many-body state follows from the one-particle
propagator of the bare hop plus bosonic symmetrization.  This path never
touches the Fock-space Hamiltonian and serves as an independent oracle for
the free-mode gate simulations.

Conventions match :mod:`.gates`: hopping J = 1, hbar = 1.
"""
from __future__ import annotations

import numpy as np

from ..core import ValidationError
from ..dfs import logical_basis_arrays
from .fock import FockBasis, embed_qubit_chain, two_particle_embedding


def _single_particle_propagator(sites: int, t: float) -> np.ndarray:
    """exp(-i h t) for the one-particle hop h = -J sum |j><j+1| + h.c."""
    if sites == 2:
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, 1j * s], [1j * s, c]])
    if sites == 3:
        # eigenvalues -sqrt(2), 0, +sqrt(2) (in units of J)
        r = 1 / np.sqrt(2)
        V = np.array([
            [0.5, r, 0.5],
            [r, 0.0, -r],
            [0.5, -r, 0.5],
        ])
        w = np.array([-np.sqrt(2), 0.0, np.sqrt(2)])
        return (V * np.exp(-1j * w * t)) @ V.T
    raise ValidationError("single-particle propagator only for 2 or 3 sites")


def free_pair_state(basis: FockBasis, psi_mat0: np.ndarray, t: float) -> np.ndarray:
    """Evolve a dynamic-pair state (Fock dim x 4 frozen columns) for time t
    under the bare hop, via the one-particle propagator applied to both atoms
    in first quantization."""
    M = basis.sites
    u = _single_particle_propagator(M, t)
    T = two_particle_embedding(basis)
    X = (T @ psi_mat0).reshape(M, 2, M, 2, -1)
    X = np.einsum("ac,bd,cidjf->aibjf", u, u, X)
    return T.conj().T @ X.reshape(4 * M * M, -1)


def closed_form_free_evolution(which: str, t: float,
                               logical: np.ndarray | None = None):
    """Free evolution of one logical qubit with one mobile atom pair.

    ``which`` selects the configuration:
      * ``"rz_pair"``: atoms 1 and 2 hop on a double well (front pair mobile).
      * ``"cphase_zero"`` / ``"cphase_one"``: atoms 3 and 4 traverse the
        three-site ancilla block, starting from |0_L> / |1_L> unless an
        explicit 16-component ``logical`` state is given.

    Returns ``(basis, psi_mat)`` with ``psi_mat[n, f]`` the amplitude of
    dynamic-pair Fock state n alongside frozen-pair computational state f.
    """
    zero, one = logical_basis_arrays()
    if which == "rz_pair":
        if logical is None:
            raise ValidationError("rz_pair needs an explicit logical state")
        basis = FockBasis.for_atoms(2, 2)
        E = embed_qubit_chain(basis, [0, 1])
        psi0 = E @ np.asarray(logical, dtype=complex).reshape(4, 4)
    elif which in ("cphase_zero", "cphase_one"):
        if logical is None:
            logical = zero if which == "cphase_zero" else one
        basis = FockBasis.for_atoms(3, 2)
        E = embed_qubit_chain(basis, [0, 2])
        # dynamic pair is (3,4): transpose so rows are the mobile atoms
        psi0 = E @ np.asarray(logical, dtype=complex).reshape(4, 4).T
    else:
        raise ValidationError(f"unknown configuration {which!r}")
    return basis, free_pair_state(basis, psi0, t)
