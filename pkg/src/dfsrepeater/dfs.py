"""The 4-physical-qubit decoherence-free subspace (DFS).

The logical qubit lives in the total-spin-zero subspace of four spin-1/2
particles.  Qubit 1 is the most significant tensor factor, so the
computational basis index of |ijkl> is 8i + 4j + 2k + l.

Logical operators are materialized as full 16x16 matrices (not abstract
2x2 blocks) so that leakage out of the DFS under imperfect physical gates
stays representable.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Operator, StateVector, ValidationError, expm_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

DIM = 16


@dataclass(frozen=True)
class NoiseField:
    """Collective field (B_x, B_y, B_z) coupling identically to all qubits."""
    B: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in self.B)
        if len(b) != 3 or not all(np.isfinite(b)):
            raise ValidationError("NoiseField needs three finite components")
        object.__setattr__(self, "B", b)


def _basis_index(bits) -> int:
    idx = 0
    for b in bits:
        idx = 2 * idx + b
    return idx


def _ket(bits) -> np.ndarray:
    v = np.zeros(DIM, dtype=complex)
    v[_basis_index(bits)] = 1.0
    return v


def logical_basis_arrays() -> tuple[np.ndarray, np.ndarray]:
    """|0_L> and |1_L> as raw 16-component arrays."""
    singlet = np.zeros(4, dtype=complex)
    singlet[0b01] = 1.0
    singlet[0b10] = -1.0
    zero = 0.5 * np.kron(singlet, singlet)

    plus = np.zeros(4, dtype=complex)
    plus[0b01] = 1.0
    plus[0b10] = 1.0
    one = (2 * _ket((1, 1, 0, 0)) + 2 * _ket((0, 0, 1, 1)) - np.kron(plus, plus))
    one /= 2 * np.sqrt(3)
    return zero, one


def logical_basis() -> tuple[StateVector, StateVector]:
    zero, one = logical_basis_arrays()
    return StateVector(zero), StateVector(one)


@lru_cache(maxsize=None)
def permutation_array(i: int, j: int) -> np.ndarray:
    """16x16 unitary swapping physical qubits i and j (1-based)."""
    if i == j or not (1 <= i <= 4) or not (1 <= j <= 4):
        raise ValidationError("permutation indices must be distinct and in 1..4")
    V = np.zeros((DIM, DIM))
    for idx in range(DIM):
        bits = [(idx >> (3 - q)) & 1 for q in range(4)]
        bits[i - 1], bits[j - 1] = bits[j - 1], bits[i - 1]
        V[_basis_index(bits), idx] = 1.0
    return V


def permutation_op(i: int, j: int) -> Operator:
    return Operator(permutation_array(i, j), hermitian_hint=True)


def logical_X() -> Operator:
    """X_L = (V12 + 2 V23)/sqrt(3)."""
    return Operator((permutation_array(1, 2) + 2 * permutation_array(2, 3)) / np.sqrt(3),
                    hermitian_hint=True)


def logical_Z() -> Operator:
    """Z_L = -V12 (equivalently -V34 on the DFS)."""
    return Operator(-permutation_array(1, 2), hermitian_hint=True)


@lru_cache(maxsize=None)
def dfs_projector_array() -> np.ndarray:
    zero, one = logical_basis_arrays()
    return np.outer(zero, zero.conj()) + np.outer(one, one.conj())


def dfs_projector() -> Operator:
    return Operator(dfs_projector_array(), hermitian_hint=True)


@dataclass(frozen=True)
class DfsCodec:
    logical_zero: StateVector
    logical_one: StateVector
    projector: Operator

    @classmethod
    def build(cls) -> "DfsCodec":
        zero, one = logical_basis()
        return cls(zero, one, dfs_projector())


def logical_rotation(axis: str, theta: float) -> Operator:
    """exp(-i theta/2 X_L) or exp(-i theta/2 Z_L); maps the DFS to itself."""
    if axis == "x":
        gen = logical_X().matrix
    elif axis == "z":
        gen = logical_Z().matrix
    else:
        raise ValidationError(f"axis must be 'x' or 'z', got {axis!r}")
    return Operator(expm_hermitian(gen, theta / 2))


def collective_noise_hamiltonian(field: NoiseField) -> Operator:
    """H_I = sum_i (sigma_i^x B_x + sigma_i^y B_y + sigma_i^z B_z)."""
    bx, by, bz = field.B
    single = bx * SX + by * SY + bz * SZ
    H = np.zeros((DIM, DIM), dtype=complex)
    for q in range(4):
        ops = [I2] * 4
        ops[q] = single
        term = ops[0]
        for o in ops[1:]:
            term = np.kron(term, o)
        H += term
    return Operator(H, hermitian_hint=True)


def leakage(psi) -> float:
    """Probability of finding a (normalized) 16-dim state outside the DFS."""
    amp = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if amp.size != DIM:
        raise ValidationError("leakage expects a 16-dimensional state")
    p_in = np.real(np.vdot(amp, dfs_projector_array() @ amp))
    return float(min(max(1.0 - p_in, 0.0), 1.0))
