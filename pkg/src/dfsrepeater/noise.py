"""Dephasing noise, quantum channels and fidelity figures of merit.

Channels are stored as superoperator matrices acting on row-major
vectorized density matrices, i.e. vec(A X B) = (A kron B^T) vec(X).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, sqrtm
from scipy.optimize import minimize

from .core import DensityMatrix, ValidationError

_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

MODULE_KINDS = ("state_transfer", "cphase", "cnot", "ent_purification")


@dataclass(frozen=True)
class DephasingModel:
    """Markovian dephasing of the mobile ancilla over a duration t:
    Lindblad operator sqrt(gamma/2) Z, leaving the encoded register
    untouched.  1/gamma is the decoherence time."""
    gamma: float
    t: float = 0.0

    def __post_init__(self):
        if self.gamma < 0 or self.t < 0:
            raise ValidationError("dephasing rate and duration must be >= 0")

    @property
    def gamma_t(self) -> float:
        return self.gamma * self.t

    def flip_probability(self) -> float:
        """Weight of the Z Kraus branch after the duration t."""
        return (1.0 - np.exp(-self.gamma_t)) / 2.0


@dataclass(frozen=True)
class QuantumOperation:
    """A linear map on density matrices, stored as a d^2 x d^2 superoperator."""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = m.shape[0]
        d = int(round(np.sqrt(n)))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or d * d != n:
            raise ValidationError("superoperator must be square with d^2 rows")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    @classmethod
    def identity(cls, dim: int) -> "QuantumOperation":
        return cls(np.eye(dim * dim))

    @classmethod
    def from_unitary(cls, U: np.ndarray) -> "QuantumOperation":
        U = np.asarray(U, dtype=complex)
        return cls(np.kron(U, U.conj()))

    @classmethod
    def from_kraus(cls, kraus) -> "QuantumOperation":
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        if not ks:
            raise ValidationError("need at least one Kraus operator")
        S = sum(np.kron(k, k.conj()) for k in ks)
        return cls(S)

    def compose(self, other: "QuantumOperation") -> "QuantumOperation":
        """self after other (matrix product self @ other)."""
        if self.dim != other.dim:
            raise ValidationError("dimension mismatch in composition")
        return QuantumOperation(self.matrix @ other.matrix)

    def __matmul__(self, other):
        if isinstance(other, QuantumOperation):
            return self.compose(other)
        return NotImplemented

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (d, d):
            raise ValidationError("state dimension mismatch")
        return (self.matrix @ rho.reshape(d * d)).reshape(d, d)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.apply(rho)

    def choi(self) -> np.ndarray:
        d = self.dim
        return self.matrix.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)

    def is_trace_preserving(self, atol: float = 1e-10) -> bool:
        d = self.dim
        # Tr of the output = <vec(I)| S, must equal <vec(I)|
        tr_row = np.eye(d).reshape(d * d) @ self.matrix
        return bool(np.allclose(tr_row, np.eye(d).reshape(d * d), atol=atol))

    def is_completely_positive(self, atol: float = 1e-10) -> bool:
        w = np.linalg.eigvalsh((self.choi() + self.choi().conj().T) / 2)
        return bool(w.min() >= -atol)


def _embed_single(op2: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    mats = [np.eye(2)] * n_qubits
    mats[qubit] = op2
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def phase_damping(gamma_t: float, qubit: int = 0, n_qubits: int = 1) -> QuantumOperation:
    """Phase damping channel exp(L t) of dephasing strength gamma * t on one
    qubit of an n-qubit register; Kraus form sqrt(p) I, sqrt(1-p) Z with
    p = (1 + e^{-gamma t}) / 2."""
    if gamma_t < 0:
        raise ValidationError("gamma * t must be >= 0")
    p = (1.0 + np.exp(-gamma_t)) / 2.0
    Z = _embed_single(_Z, qubit, n_qubits)
    I = np.eye(2 ** n_qubits)
    return QuantumOperation.from_kraus([np.sqrt(p) * I, np.sqrt(1 - p) * Z])


def lindblad_channel(H: np.ndarray, collapse_ops, t: float) -> QuantumOperation:
    """Channel exp(L t) of d rho/dt = -i[H, rho] + sum_k (C rho C^+ -
    {C^+C, rho}/2), built by exponentiating the Liouvillian (hbar = 1)."""
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    I = np.eye(d)
    L = -1j * (np.kron(H, I) - np.kron(I, H.T))
    for C in collapse_ops:
        C = np.asarray(C, dtype=complex)
        CdC = C.conj().T @ C
        L += np.kron(C, C.conj()) - 0.5 * np.kron(CdC, I) - 0.5 * np.kron(I, CdC.T)
    return QuantumOperation(expm(L * t))


def lindblad_propagate(rho, H: np.ndarray, model: DephasingModel,
                       dephased_qubit: int = 0) -> DensityMatrix:
    """Solve the master equation d rho/dt = -i[H, rho] + (gamma/2)
    (Z rho Z - rho) over the model duration, with sigma_z acting on the
    designated two-level subsystem of a qubit register."""
    if isinstance(rho, DensityMatrix):
        rho = rho.matrix
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    n_qubits = int(round(np.log2(d)))
    if 2 ** n_qubits != d:
        raise ValidationError("state dimension must be a power of two")
    if not (0 <= dephased_qubit < n_qubits):
        raise ValidationError("dephased qubit index out of range")
    Z = _embed_single(_Z, dephased_qubit, n_qubits)
    C = np.sqrt(model.gamma / 2) * Z
    out = lindblad_channel(H, [C], model.t).apply(rho)
    return DensityMatrix((out + out.conj().T) / 2)


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    if isinstance(rho, DensityMatrix):
        rho = rho.matrix
    if isinstance(sigma, DensityMatrix):
        sigma = sigma.matrix
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    # fast paths for (near) pure states
    for a, b in ((rho, sigma), (sigma, rho)):
        w, V = np.linalg.eigh(a)
        if w[-1] > 1 - 1e-12:
            psi = V[:, -1]
            return float(np.real(np.vdot(psi, b @ psi)))
    s = sqrtm(rho)
    inner = sqrtm(s @ sigma @ s)
    return float(np.real(np.trace(inner)) ** 2)


def _params_to_state(x: np.ndarray, dim: int) -> np.ndarray:
    amps = x[:dim] * np.exp(1j * np.concatenate(([0.0], x[dim:])))
    n = np.linalg.norm(amps)
    if n == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    return amps / n


def _haar_states(dim: int, n: int, rng) -> np.ndarray:
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _product_states(dims, n, rng) -> np.ndarray:
    out = None
    for d in dims:
        block = _haar_states(d, n, rng)
        out = block if out is None else np.einsum("ni,nj->nij", out, block).reshape(n, -1)
    return out


@dataclass(frozen=True)
class FidelityMinimum:
    """Worst-case fidelity together with the pure input attaining it."""
    value: float
    state: np.ndarray

    def __float__(self) -> float:
        return self.value


def operation_fidelity(ideal: QuantumOperation, noisy: QuantumOperation,
                       n_samples: int = 10_000, seed: int = 0,
                       factors=None, refine: bool = True) -> FidelityMinimum:
    """Worst-case fidelity min_psi F(ideal(psi), noisy(psi)) over pure inputs.

    Seeded Haar sampling (or product states over the tensor ``factors``)
    followed by Nelder-Mead refinement from the worst sample.
    """
    if noisy.dim != ideal.dim:
        raise ValidationError("dimension mismatch")
    d = noisy.dim
    rng = np.random.default_rng(seed)
    if factors is None:
        samples = _haar_states(d, n_samples, rng)
    else:
        if int(np.prod(factors)) != d:
            raise ValidationError("factors must multiply to the channel dimension")
        samples = _product_states(factors, n_samples, rng)

    def fid(psi: np.ndarray) -> float:
        rho = np.outer(psi, psi.conj())
        return state_fidelity(ideal.apply(rho), noisy.apply(rho))

    vals = np.array([fid(p) for p in samples])
    best = samples[int(np.argmin(vals))]
    fmin = float(vals.min())
    if refine:
        x0 = np.concatenate([np.abs(best), np.angle(best[1:]) - np.angle(best[0])])
        res = minimize(lambda x: fid(_params_to_state(x, d)), x0,
                       method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-7, "fatol": 1e-10})
        if res.fun < fmin:
            fmin = float(res.fun)
            best = _params_to_state(res.x, d)
    return FidelityMinimum(value=fmin, state=best)


@dataclass(frozen=True)
class ModuleFidelity:
    value: float
    is_bound: bool

    def __float__(self) -> float:
        return self.value


def analytic_module_fidelity(module: str, gamma_t: float) -> ModuleFidelity:
    """Worst-case fidelity of a repeater building block when the mobile
    ancilla dephases at rate gamma during one register contact of duration t.

    ``cphase`` (one contact) and ``cnot`` (two contacts) are exact values, as
    is ``state_transfer`` between two encoded registers; ``ent_purification``
    is only a lower bound 1 - (3/2 + sqrt(2)) gamma t, flagged as such.
    """
    if gamma_t < 0:
        raise ValidationError("gamma * t must be >= 0")
    e1 = np.exp(-gamma_t)
    if module == "state_transfer":
        return ModuleFidelity(float((1 + np.exp(-2 * gamma_t)) * (1 + e1) / 4), False)
    if module == "cphase":
        return ModuleFidelity(float((1 + e1) / 2), False)
    if module == "cnot":
        return ModuleFidelity(float(((1 + e1) / 2) ** 2), False)
    if module == "ent_purification":
        return ModuleFidelity(float(1 - (1.5 + np.sqrt(2)) * gamma_t), True)
    raise ValidationError(f"unknown module {module!r}")
