"""Dense complex linear algebra for small Hilbert spaces.

States, operators and density matrices are thin immutable wrappers around
numpy arrays.  Everything here is a pure function; the capacity cap guards
against accidentally requesting Hilbert spaces this package is not meant
for (a few hundred dimensions at most).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Largest number of matrix entries any operation may allocate.
MAX_ENTRIES = 1_000_000

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10


class CapacityError(Exception):
    """Requested Hilbert space exceeds the configured entry cap."""


class ValidationError(Exception):
    """Input violates a structural precondition (dims, hermiticity, ...)."""


_BASIS_REGISTRY: dict[str, int] = {}


def register_basis(tag: str, dim: int) -> None:
    """Associate a basis label with its dimension for later validation."""
    existing = _BASIS_REGISTRY.get(tag)
    if existing is not None and existing != dim:
        raise ValidationError(f"basis {tag!r} already registered with dim {existing}")
    _BASIS_REGISTRY[tag] = dim


def _as_vector(x) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("state amplitudes must be a nonempty 1-d array")
    return arr


def _as_square(x) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise ValidationError("matrix must be square and nonempty")
    return arr


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    basis_tag: str | None = None

    def __post_init__(self):
        arr = _as_vector(self.amplitudes)
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)
        if self.basis_tag is not None:
            expected = _BASIS_REGISTRY.get(self.basis_tag)
            if expected is not None and expected != arr.size:
                raise ValidationError(
                    f"basis {self.basis_tag!r} has dim {expected}, got {arr.size}"
                )

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.basis_tag)

    def overlap(self, other: "StateVector") -> complex:
        if other.dim != self.dim:
            raise ValidationError("dimension mismatch in overlap")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density_matrix(self) -> "DensityMatrix":
        v = self.normalize().amplitudes
        return DensityMatrix(np.outer(v, v.conj()))


@dataclass(frozen=True)
class Operator:
    matrix: np.ndarray
    hermitian_hint: bool = False

    def __post_init__(self):
        arr = _as_square(self.matrix)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        if self.hermitian_hint:
            dev = np.max(np.abs(arr - arr.conj().T))
            if dev > HERMITICITY_TOL:
                raise ValidationError(f"hermitian_hint set but |H - H^dag| = {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.hermitian_hint)

    def apply(self, psi: StateVector) -> StateVector:
        if psi.dim != self.dim:
            raise ValidationError("dimension mismatch in apply")
        return StateVector(self.matrix @ psi.amplitudes, psi.basis_tag)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        arr = _as_square(self.matrix)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        if self.validate:
            herm = np.max(np.abs(arr - arr.conj().T))
            if herm > 1e-10:
                raise ValidationError(f"density matrix not hermitian: {herm:.3e}")
            tr = complex(np.trace(arr))
            if abs(tr - 1.0) > 1e-9:
                raise ValidationError(f"density matrix trace {tr} != 1")
            evals = np.linalg.eigvalsh((arr + arr.conj().T) / 2)
            if evals.min() < -EIGENVALUE_TOL:
                raise ValidationError(f"negative eigenvalue {evals.min():.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_capacity(entries: int) -> None:
    if entries > MAX_ENTRIES:
        raise CapacityError(f"requested {entries} entries exceeds cap {MAX_ENTRIES}")


def tensor(a, b):
    """Kronecker product of two states or two operators (left factor is the
    most significant index)."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        _check_capacity(a.dim * b.dim)
        return StateVector(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Operator) and isinstance(b, Operator):
        _check_capacity((a.dim * b.dim) ** 2)
        return Operator(np.kron(a.matrix, b.matrix), a.hermitian_hint and b.hermitian_hint)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        _check_capacity((a.dim * b.dim) ** 2)
        return DensityMatrix(np.kron(a.matrix, b.matrix))
    raise ValidationError("tensor requires two operands of the same kind")


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for hermitian H via eigendecomposition (exact to rounding)."""
    H = _as_square(H)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def propagate(H: Operator, t: float, psi: StateVector) -> StateVector:
    """Evolve psi under exp(-i H t) (hbar = 1)."""
    if H.dim != psi.dim:
        raise ValidationError("dimension mismatch between H and psi")
    dev = np.max(np.abs(H.matrix - H.matrix.conj().T))
    if dev > 1e-10:
        raise ValidationError(f"propagate requires hermitian H, |H - H^dag| = {dev:.3e}")
    return StateVector(expm_hermitian(H.matrix, t) @ psi.amplitudes, psi.basis_tag)


def partial_trace_array(rho: np.ndarray, keep, dims) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep`` (raw-array form)."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError("keep indices out of range")
    total = int(np.prod(dims))
    rho = _as_square(rho)
    if rho.shape[0] != total:
        raise ValidationError("product of dims does not match density matrix size")
    traced = [i for i in range(n) if i not in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise CapacityError("too many tensor factors")
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in traced:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    spec = "".join(row) + "".join(col) + "->" + out
    kept = int(np.prod([dims[i] for i in keep])) if keep else 1
    result = np.einsum(spec, rho.reshape(dims + dims)).reshape(kept, kept)
    return result


def partial_trace(rho: DensityMatrix, keep, dims) -> DensityMatrix:
    return DensityMatrix(partial_trace_array(rho.matrix, keep, dims))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed pure state as a raw array."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_pure_state(dim: int, seed: int) -> StateVector:
    """Haar-random state, deterministic per seed."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    return StateVector(haar_state(dim, rng))
