import numpy as np
import pytest
from scipy.linalg import expm

from dfsrepeater.core import (CapacityError, DensityMatrix, Operator,
                              StateVector, ValidationError, expm_hermitian,
                              haar_state, partial_trace_array, propagate,
                              random_pure_state, tensor)


def test_state_vector_normalize_and_overlap():
    psi = StateVector(np.array([3.0, 4.0]))
    assert psi.norm() == pytest.approx(5.0)
    n = psi.normalize()
    assert n.norm() == pytest.approx(1.0)
    assert complex(n.overlap(n)) == pytest.approx(1.0)


def test_state_vector_rejects_bad_shapes():
    with pytest.raises(ValidationError):
        StateVector(np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        StateVector(np.array([0.0, 0.0])).normalize()


def test_operator_hermitian_hint_enforced():
    with pytest.raises(ValidationError):
        Operator(np.array([[0.0, 1.0], [0.0, 0.0]]), hermitian_hint=True)
    Operator(np.array([[0.0, 1.0], [1.0, 0.0]]), hermitian_hint=True)


def test_density_matrix_validation():
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))   # trace 2
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[1.5, 0.0], [0.0, -0.5]]))  # negative
    DensityMatrix(np.eye(2) / 2)


def test_tensor_and_capacity_cap():
    a = StateVector(np.array([1.0, 0.0]))
    assert tensor(a, a).dim == 4
    big = Operator(np.eye(64))
    with pytest.raises(CapacityError):
        tensor(tensor(big, big), big)


def test_expm_hermitian_matches_scipy():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    H = (A + A.conj().T) / 2
    assert np.allclose(expm_hermitian(H, 0.7), expm(-1j * H * 0.7),
                       atol=1e-12)


def test_propagate_requires_hermitian():
    H = Operator(np.array([[0.0, 1.0], [0.0, 0.0]]))
    psi = StateVector(np.array([1.0, 0.0]))
    with pytest.raises(ValidationError):
        propagate(H, 1.0, psi)


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(5)
    a = haar_state(2, rng)
    b = haar_state(3, rng)
    rho = np.outer(np.kron(a, b), np.kron(a, b).conj())
    red = partial_trace_array(rho, keep=[0], dims=[2, 3])
    assert np.allclose(red, np.outer(a, a.conj()), atol=1e-12)
    assert partial_trace_array(rho, keep=[], dims=[2, 3]).item() == \
        pytest.approx(1.0)


def test_random_pure_state_deterministic():
    s1 = random_pure_state(4, seed=11)
    s2 = random_pure_state(4, seed=11)
    assert np.array_equal(s1.amplitudes, s2.amplitudes)
    assert s1.norm() == pytest.approx(1.0)
