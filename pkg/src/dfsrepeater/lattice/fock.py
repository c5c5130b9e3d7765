"""Fock basis and Bose-Hubbard Hamiltonians for two bosonic species.

Basis states are occupation tuples |n_a^1, n_b^1; ...; n_a^M, n_b^M> with
the particle number of each species conserved.  A basis may contain several
(n_a, n_b) sectors; the Hamiltonian is block diagonal across them.

Internal atoms are labeled by species: an atom in internal state |0> is an
``a`` boson, |1> is a ``b`` boson.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from ..core import CapacityError, MAX_ENTRIES, ValidationError


def _occupations(sites: int, total: int, cap: int):
    """All tuples of length `sites` with entries <= cap summing to total."""
    if sites == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap) + 1):
        for rest in _occupations(sites - 1, total - first, cap):
            yield (first,) + rest


@dataclass(frozen=True)
class FockBasis:
    sites: int
    sectors: tuple          # tuple of (n_a, n_b) pairs
    max_per_site: int = 4
    states: tuple = field(init=False, compare=False, repr=False)
    index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.sites < 1 or self.sites > 6:
            raise ValidationError("sites must be in 1..6")
        sectors = tuple(sorted({(int(na), int(nb)) for na, nb in self.sectors}))
        object.__setattr__(self, "sectors", sectors)
        states = []
        for n_a, n_b in sectors:
            for occ_a in _occupations(self.sites, n_a, self.max_per_site):
                for occ_b in _occupations(self.sites, n_b, self.max_per_site):
                    states.append(tuple(zip(occ_a, occ_b)))
        if len(states) ** 2 > MAX_ENTRIES:
            raise CapacityError(f"basis of {len(states)} states exceeds capacity cap")
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "index", {s: i for i, s in enumerate(states)})

    @classmethod
    def for_atoms(cls, sites: int, n_atoms: int, max_per_site: int = 4) -> "FockBasis":
        """All species splittings of ``n_atoms`` indistinguishable-by-position atoms."""
        sectors = [(k, n_atoms - k) for k in range(n_atoms + 1)]
        return cls(sites, tuple(sectors), max_per_site)

    @property
    def dim(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class HubbardParams:
    """Couplings of the two-species chain: hoppings J_j^(a), J_j^(b) between
    sites j and j+1 and on-site interactions U_a, U_b, U_ab (energy units)."""
    J_a: tuple
    J_b: tuple
    U_a: float
    U_b: float
    U_ab: float

    def __post_init__(self):
        ja = tuple(float(j) for j in self.J_a)
        jb = tuple(float(j) for j in self.J_b)
        if len(ja) != len(jb):
            raise ValidationError("J_a and J_b must have equal length")
        if any(j < 0 for j in ja + jb):
            raise ValidationError("hopping energies must be >= 0")
        vals = ja + jb + (self.U_a, self.U_b, self.U_ab)
        if not all(np.isfinite(vals)):
            raise ValidationError("all couplings must be finite")
        object.__setattr__(self, "J_a", ja)
        object.__setattr__(self, "J_b", jb)

    @classmethod
    def uniform(cls, sites: int, J, U: float) -> "HubbardParams":
        """Equal hoppings for both species and U_a = U_b = U_ab = U.
        ``J`` may be a scalar or a per-link sequence."""
        if np.isscalar(J):
            links = (float(J),) * (sites - 1)
        else:
            links = tuple(float(j) for j in J)
            if len(links) != sites - 1:
                raise ValidationError("need one hopping per link")
        return cls(links, links, float(U), float(U), float(U))


@dataclass(frozen=True)
class AncillaParams:
    """Frozen auxiliary atom: site index (0-based), state-dependent contact
    interactions with the register and its internal state sigma."""
    site: int
    U_q0: float
    U_q1: float
    sigma: int

    def __post_init__(self):
        if self.sigma not in (0, 1):
            raise ValidationError("ancilla state sigma must be 0 or 1")

    @property
    def interaction(self) -> float:
        return self.U_q1 if self.sigma == 1 else self.U_q0


def build_hamiltonian(params: HubbardParams, basis: FockBasis) -> np.ndarray:
    """Dense Hamiltonian: -J_j^(s) s_j^dag s_{j+1} + h.c. hopping plus
    (U_s/2) n_s (n_s - 1) and U_ab n_a n_b on-site terms."""
    if len(params.J_a) != basis.sites - 1:
        raise ValidationError("hopping array length does not match basis sites")
    dim = basis.dim
    H = np.zeros((dim, dim))
    for i, state in enumerate(basis.states):
        occ = np.array(state)        # shape (M, 2)
        na, nb = occ[:, 0], occ[:, 1]
        H[i, i] += float(np.sum(params.U_a / 2 * na * (na - 1)
                                + params.U_b / 2 * nb * (nb - 1)
                                + params.U_ab * na * nb))
        for j in range(basis.sites - 1):
            for sp, J in ((0, params.J_a[j]), (1, params.J_b[j])):
                if J == 0.0:
                    continue
                # s_j^dag s_{j+1}: move one boson from site j+1 to site j
                for src, dst in ((j + 1, j), (j, j + 1)):
                    if state[src][sp] == 0:
                        continue
                    if state[dst][sp] + 1 > basis.max_per_site:
                        continue
                    new = [list(p) for p in state]
                    new[src][sp] -= 1
                    new[dst][sp] += 1
                    key = tuple(tuple(p) for p in new)
                    k = basis.index.get(key)
                    if k is None:
                        continue
                    amp = np.sqrt((state[dst][sp] + 1) * state[src][sp])
                    H[k, i] += -J * amp
    return H


def build_cphase_hamiltonian(params: HubbardParams, anc: AncillaParams,
                             basis: FockBasis) -> np.ndarray:
    """Register Hamiltonian plus the ancilla contact shift
    U^q_sigma (n_a + n_b) at the ancilla site (the ancilla itself is frozen,
    n_q = 1)."""
    if not (0 <= anc.site < basis.sites):
        raise ValidationError("ancilla site outside the lattice")
    H = build_hamiltonian(params, basis)
    U = anc.interaction
    if U != 0.0:
        for i, state in enumerate(basis.states):
            H[i, i] += U * (state[anc.site][0] + state[anc.site][1])
    return H


def number_operator(basis: FockBasis, species: int, site: int | None = None) -> np.ndarray:
    """Diagonal total (or per-site) number operator for species 0 (a) / 1 (b)."""
    diag = np.array([
        sum(p[species] for p in s) if site is None else s[site][species]
        for s in basis.states
    ], dtype=float)
    return np.diag(diag)


def product_state_index(basis: FockBasis, placements) -> int:
    """Index of the Fock state with one atom per (site, species) placement."""
    occ = [[0, 0] for _ in range(basis.sites)]
    for site, species in placements:
        occ[site][species] += 1
    key = tuple(tuple(p) for p in occ)
    idx = basis.index.get(key)
    if idx is None:
        raise ValidationError(f"state {key} not in basis")
    return idx


def embed_qubit_chain(basis: FockBasis, sites) -> np.ndarray:
    """Isometry from the internal space of n atoms parked one-per-site at the
    given sites into the Fock basis.  Column order is the computational basis
    of the atom chain (first listed atom most significant)."""
    sites = list(sites)
    n = len(sites)
    E = np.zeros((basis.dim, 2 ** n))
    for col in range(2 ** n):
        bits = [(col >> (n - 1 - k)) & 1 for k in range(n)]
        idx = product_state_index(basis, list(zip(sites, bits)))
        E[idx, col] = 1.0
    return E


def two_particle_embedding(basis: FockBasis) -> np.ndarray:
    """First-quantized form of a 2-atom Fock basis: isometry into the
    distinguishable-particle space (C^{2M})x(C^{2M}), mode index 2*site+species.
    Only valid when every sector holds exactly two atoms."""
    M = basis.sites
    nmodes = 2 * M
    T = np.zeros((nmodes * nmodes, basis.dim))
    for i, state in enumerate(basis.states):
        modes = []
        for site in range(M):
            for sp in range(2):
                modes.extend([2 * site + sp] * state[site][sp])
        if len(modes) != 2:
            raise ValidationError("two_particle_embedding needs 2-atom sectors")
        m1, m2 = modes
        if m1 == m2:
            T[m1 * nmodes + m2, i] = 1.0
        else:
            T[m1 * nmodes + m2, i] = 1 / np.sqrt(2)
            T[m2 * nmodes + m1, i] = 1 / np.sqrt(2)
    return T


def pair_dfs_leakage(psi_mat: np.ndarray, basis: FockBasis, dynamic_is_front: bool,
                     projector16: np.ndarray) -> float:
    """DFS leakage of a 4-atom state whose dynamic pair lives in a 2-atom Fock
    basis.  ``psi_mat[n, f]`` holds the amplitude of Fock state n of the
    dynamic pair together with computational state f of the frozen pair;
    ``dynamic_is_front`` says whether the dynamic atoms are physical qubits
    (1,2) rather than (3,4)."""
    M = basis.sites
    T = two_particle_embedding(basis)
    X = T @ psi_mat                                # ((2M)^2, 4)
    X = X.reshape(M, 2, M, 2, 4)                   # s1, sig1, s2, sig2, f
    if dynamic_is_front:
        # internal order (sig1 sig2 f1 f2), spatial last
        Y = X.transpose(1, 3, 4, 0, 2).reshape(16, M * M)
    else:
        Y = X.transpose(4, 1, 3, 0, 2).reshape(16, M * M)
    total = float(np.sum(np.abs(Y) ** 2))
    inside = float(np.sum(np.abs(projector16 @ Y) ** 2))
    if total == 0.0:
        return 0.0
    return float(min(max(1.0 - inside / total, 0.0), 1.0))
