import numpy as np
import pytest

from dfsrepeater.core import ValidationError
from dfsrepeater.dfs import (DfsCodec, NoiseField, collective_noise_hamiltonian,
                             dfs_projector_array, leakage, logical_basis_arrays,
                             logical_rotation, logical_X, logical_Z,
                             permutation_array)


def test_logical_states_are_orthonormal():
    zero, one = logical_basis_arrays()
    assert np.vdot(zero, zero) == pytest.approx(1.0)
    assert np.vdot(one, one) == pytest.approx(1.0)
    assert abs(np.vdot(zero, one)) < 1e-14


def test_permutation_operators_are_involutions():
    for i, j in ((1, 2), (2, 3), (3, 4), (1, 4)):
        V = permutation_array(i, j)
        assert np.allclose(V @ V, np.eye(16))
        assert np.allclose(V, V.conj().T)


def test_logical_operators_obey_pauli_algebra():
    X = logical_X().matrix
    Z = logical_Z().matrix
    P = dfs_projector_array()
    # on the logical block: X^2 = Z^2 = 1 and {X, Z} = 0
    assert np.allclose(P @ (X @ X - np.eye(16)) @ P, 0.0, atol=1e-12)
    assert np.allclose(P @ (Z @ Z - np.eye(16)) @ P, 0.0, atol=1e-12)
    assert np.allclose(P @ (X @ Z + Z @ X) @ P, 0.0, atol=1e-12)


def test_logical_action_on_codewords():
    zero, one = logical_basis_arrays()
    X = logical_X().matrix
    Z = logical_Z().matrix
    assert np.allclose(X @ zero, one, atol=1e-12)
    assert np.allclose(X @ one, zero, atol=1e-12)
    assert np.allclose(Z @ zero, zero, atol=1e-12)
    assert np.allclose(Z @ one, -one, atol=1e-12)


def test_rotations_are_unitary_and_preserve_the_subspace():
    zero, one = logical_basis_arrays()
    for axis in ("x", "z"):
        for theta in (0.3, np.pi / 2, np.pi):
            U = logical_rotation(axis, theta).matrix
            assert np.allclose(U @ U.conj().T, np.eye(16), atol=1e-12)
            for psi in (zero, one):
                assert leakage(U @ psi) < 1e-13


def test_x_rotation_by_pi_flips_the_codewords():
    zero, one = logical_basis_arrays()
    U = logical_rotation("x", np.pi).matrix
    # exp(-i pi X_L / 2) = -i X_L on the block
    assert np.allclose(U @ zero, -1j * one, atol=1e-12)


def test_rotation_rejects_unknown_axis():
    with pytest.raises(ValidationError):
        logical_rotation("y", 0.1)


def test_collective_noise_annihilates_codewords():
    zero, one = logical_basis_arrays()
    rng = np.random.default_rng(7)
    for _ in range(5):
        H = collective_noise_hamiltonian(
            NoiseField(tuple(rng.standard_normal(3)))).matrix
        assert np.linalg.norm(H @ zero) < 1e-12
        assert np.linalg.norm(H @ one) < 1e-12


def test_leakage_of_codewords_and_outside_state():
    zero, _ = logical_basis_arrays()
    assert leakage(zero) < 1e-14
    outside = np.zeros(16)
    outside[0] = 1.0   # |0000> has total spin 2, not in the DFS
    assert leakage(outside) == pytest.approx(1.0)


def test_codec_bundle():
    codec = DfsCodec.build()
    assert codec.logical_zero.dim == 16
    P = codec.projector.matrix
    assert np.allclose(P @ P, P, atol=1e-12)
    assert np.real(np.trace(P)) == pytest.approx(2.0)
