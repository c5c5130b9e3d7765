"""Adiabatic elimination of multiply-occupied sites.

H_eff = PHP - PHQ (QHQ)^{-1} QHP with the inversion taken to first order in
the hopping-over-interaction ratio, i.e. only the diagonal (interaction)
part of QHQ is inverted.  Higher orders are inconsistent with the
perturbative treatment and are dropped, which also makes the closed-form
coupling expressions exact identities.  An exact Schur-complement mode is
available for cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ValidationError
from .fock import FockBasis, HubbardParams, build_hamiltonian, product_state_index

SINGULARITY_RTOL = 1e-10


class SingularBlockError(Exception):
    """QHQ is singular on the range of Q beyond tolerance."""


def _projector_support(P: np.ndarray) -> np.ndarray:
    dev = np.max(np.abs(P @ P - P)) if P.size else 0.0
    if dev > 1e-10 or np.max(np.abs(P - P.conj().T)) > 1e-10:
        raise ValidationError("P must be an orthogonal projector")
    return np.where(np.abs(np.diag(P) - 1) < 1e-12)[0]


def adiabatic_eliminate(H: np.ndarray, P: np.ndarray, order: str = "first") -> np.ndarray:
    """Effective Hamiltonian on range(P).

    ``order='first'`` requires P to be a coordinate projector (diagonal 0/1)
    and inverts only the diagonal of QHQ.  ``order='exact'`` uses the
    pseudo-inverse of QHQ with singular values below
    SINGULARITY_RTOL * ||H|| treated as singular.
    """
    H = np.asarray(H)
    n = H.shape[0]
    P = np.asarray(P)
    Q = np.eye(n) - P
    PHP = P @ H @ P
    PHQ = P @ H @ Q
    QHP = Q @ H @ P
    if order == "first":
        keep = _projector_support(P)
        off = np.abs(P - np.diag(np.diag(P))).max() if n else 0.0
        if off > 1e-12 or not np.allclose(np.diag(P), np.round(np.diag(P).real), atol=1e-12):
            raise ValidationError("first-order mode needs a coordinate projector")
        drop = np.setdiff1d(np.arange(n), keep)
        d = np.real(np.diag(H))[drop]
        scale = max(np.max(np.abs(H)), 1.0)
        coupled = np.abs(PHQ[:, drop]).max(axis=0) > 0 if drop.size else np.array([])
        if drop.size and np.any((np.abs(d) < SINGULARITY_RTOL * scale) & coupled):
            raise SingularBlockError("vanishing interaction energy on a coupled excited state")
        inv = np.zeros(n)
        safe = np.abs(d) >= SINGULARITY_RTOL * scale
        inv_drop = np.zeros(drop.size)
        inv_drop[safe] = 1.0 / d[safe]
        inv[drop] = inv_drop
        Heff = PHP - PHQ @ np.diag(inv) @ QHP
    elif order == "exact":
        QHQ = Q @ H @ Q
        scale = max(np.max(np.abs(H)), 1.0)
        # rank check on the coupled part of range(Q)
        w = np.linalg.eigvalsh((QHQ + QHQ.conj().T) / 2)
        rank_Q = int(round(np.real(np.trace(Q))))
        small = np.sum(np.abs(w) < SINGULARITY_RTOL * scale) - (len(w) - rank_Q)
        if small > 0 and np.max(np.abs(PHQ)) > 0:
            # singular directions are only fatal if they couple to range(P)
            wv, V = np.linalg.eigh((QHQ + QHQ.conj().T) / 2)
            sing = V[:, np.abs(wv) < SINGULARITY_RTOL * scale]
            if np.max(np.abs(PHQ @ sing)) > SINGULARITY_RTOL * scale:
                raise SingularBlockError("QHQ singular on a coupled direction of range(Q)")
        Heff = PHP - PHQ @ np.linalg.pinv(QHQ, rcond=SINGULARITY_RTOL) @ QHP
    else:
        raise ValidationError(f"unknown order {order!r}")
    return (Heff + Heff.conj().T) / 2


@dataclass(frozen=True)
class EffectiveCouplings:
    """Closed-form second-order couplings of the 3-atom / 3-site block in the
    single-occupancy basis {|100>, |010>, |001>} labeling the position of the
    minority atom."""
    f1: float
    f2: float
    f3: float
    g1: float
    g2: float

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.f1, self.g1, 0.0],
            [self.g1, self.f2, self.g2],
            [0.0, self.g2, self.f3],
        ])


def effective_couplings(params: HubbardParams) -> EffectiveCouplings:
    if len(params.J_a) < 2:
        raise ValidationError("need at least two links (three sites)")
    j1a, j2a = params.J_a[0], params.J_a[1]
    j1b, j2b = params.J_b[0], params.J_b[1]
    Ua, Uab = params.U_a, params.U_ab
    f1 = -(Ua * (j1a ** 2 + j1b ** 2) + 4 * Uab * j2a ** 2) / (Ua * Uab)
    f2 = -(j1a ** 2 + j2a ** 2 + j1b ** 2 + j2b ** 2) / Uab
    f3 = -(Ua * (j2a ** 2 + j2b ** 2) + 4 * Uab * j1a ** 2) / (Ua * Uab)
    g1 = -2 * j1a * j1b / Uab
    g2 = -2 * j2a * j2b / Uab
    return EffectiveCouplings(f1, f2, f3, g1, g2)


def minority_position_projector(basis: FockBasis, majority: int) -> tuple[np.ndarray, list[int]]:
    """Coordinate projector onto the three single-occupancy states of the
    2-majority + 1-minority sector, plus their basis indices ordered by the
    minority atom's site."""
    minority = 1 - majority
    idxs = []
    for pos in range(3):
        placements = [(s, majority) for s in range(3) if s != pos] + [(pos, minority)]
        idxs.append(product_state_index(basis, placements))
    P = np.zeros((basis.dim, basis.dim))
    for i in idxs:
        P[i, i] = 1.0
    return P, idxs


@dataclass(frozen=True)
class EffectiveXResult:
    """Logical-block operator u*1 + v*X_L produced by the three-site hop
    configuration; ``condition_ok`` records whether the symmetric parameter
    choice J2 = sqrt(2) J1, U_a = U_b = U_ab held within tolerance."""
    u: float
    v: float
    condition_ok: bool

    def block(self) -> np.ndarray:
        return np.array([[self.u, self.v], [self.v, self.u]])


def effective_x_hamiltonian(params: HubbardParams, rtol: float = 1e-9) -> EffectiveXResult:
    c = effective_couplings(params)
    u = c.f2
    v = np.sqrt(3) / 2 * c.g2
    j1a, j2a = params.J_a[0], params.J_a[1]
    j1b, j2b = params.J_b[0], params.J_b[1]
    scale = max(abs(j1a), abs(j2a), 1e-300)
    cond = (
        abs(j2a - np.sqrt(2) * j1a) <= rtol * scale
        and abs(j2b - np.sqrt(2) * j1b) <= rtol * scale
        and abs(j1a - j1b) <= rtol * scale
        and abs(params.U_a - params.U_b) <= rtol * abs(params.U_a)
        and abs(params.U_a - params.U_ab) <= rtol * abs(params.U_a)
    )
    return EffectiveXResult(u=float(u), v=float(v), condition_ok=bool(cond))
