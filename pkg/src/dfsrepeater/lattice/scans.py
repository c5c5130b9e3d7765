"""Robustness scans: gate error figures versus a single control knob.

Each scan perturbs one parameter away from its ideal value, mimicking a
calibration error in the lattice controls, and reports three columns per
grid point: the gate infidelity, the accumulated phase error (NaN where no
phase is defined) and the leakage.  For the rotations the leakage column is
the coherent weight outside the singly occupied sector; for the CPHASE scan
it is the collective-spin (DFS) leakage.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ValidationError
from .fock import AncillaParams
from .gates import run_cphase, run_rx_gate, run_rz_gate

SCAN_KNOBS = {
    "rz": ("u_over_j", "j2_over_j1", "uab_over_u"),
    "rx": ("u_over_j", "j2_over_j1", "uab_over_u"),
    "cphase": ("uq1_over_j", "residual_u_over_j"),
}


@dataclass(frozen=True)
class ScanResult:
    gate: str
    knob: str
    grid: np.ndarray
    infidelity: np.ndarray
    phase_error: np.ndarray
    leakage: np.ndarray
    meta: dict = field(default_factory=dict)

    def columns(self) -> dict:
        """Column name to array mapping, in output order."""
        return {
            self.knob: self.grid,
            "infidelity": self.infidelity,
            "phase_error": self.phase_error,
            "leakage": self.leakage,
        }


def detuning_scan(gate: str, knob: str, grid, u_over_j: float = 100.0) -> ScanResult:
    """Sweep one control knob across ``grid`` and report the gate error
    figures at each point.

    Knobs (ideal value in parentheses):
      * rz / rx ``u_over_j``: the interaction strength itself (large); for
        rz the clock stays at the second-order value theta U / 4 J^2, so
        the phase error tracks the accuracy of the adiabatic elimination.
      * rz ``j2_over_j1`` (0): residual hop past the second barrier.
      * rx ``j2_over_j1`` (1): J2 relative to its matched value sqrt(2) J1.
      * rz / rx ``uab_over_u`` (1): interspecies over intraspecies U.
      * cphase ``uq1_over_j`` (0): ancilla shift in the passing state, with
        the traversal time relocated numerically at every point.
      * cphase ``residual_u_over_j`` (0): register interaction left on
        during the free-mode traversal at the fixed time pi hbar / sqrt(2) J.

    ``u_over_j`` sets the register interaction for the detuning knobs.
    """
    if gate not in SCAN_KNOBS or knob not in SCAN_KNOBS[gate]:
        raise ValidationError(f"no scan for gate {gate!r}, knob {knob!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("grid must be a non-empty 1d array")
    meta = {"u_over_j": u_over_j}
    infid = np.empty(grid.size)
    phase = np.full(grid.size, np.nan)
    leak = np.empty(grid.size)
    for k, x in enumerate(grid):
        if gate == "rz":
            kwargs = {"n_samples": 2, "calibrated": False}
            if knob == "u_over_j":
                res = run_rz_gate(x, **kwargs)
            elif knob == "j2_over_j1":
                res = run_rz_gate(u_over_j, j2_over_j1=x, **kwargs)
            else:
                res = run_rz_gate(u_over_j, u_ab_factor=x, **kwargs)
            infid[k] = 1 - min(res.f0, res.f1)
            phase[k] = res.phase_error
            leak[k] = res.leakage_max
        elif gate == "rx":
            if knob == "u_over_j":
                res = run_rx_gate(x, n_samples=2)
            elif knob == "j2_over_j1":
                res = run_rx_gate(u_over_j, n_samples=2,
                                  j2_factor=x * np.sqrt(2))
            else:
                res = run_rx_gate(u_over_j, n_samples=2, u_ab_factor=x)
            infid[k] = 1 - res.f_x_projected
            leak[k] = res.doublon_weight
        else:
            if knob == "uq1_over_j":
                anc = AncillaParams(site=1, U_q0=100 * u_over_j, U_q1=x, sigma=1)
                res = run_cphase(u_over_j, anc, mode="interacting", n_samples=2)
            else:
                anc = AncillaParams(site=1, U_q0=100.0, U_q1=0.0, sigma=1)
                res = run_cphase(x, anc, mode="free", n_samples=2)
            meta["t_gate"] = res.t_gate
            infid[k] = 1 - min(res.f_01, res.f_00, res.f_ph)
            phase[k] = abs(res.phase)
            leak[k] = res.leakage_max
    return ScanResult(gate=gate, knob=knob, grid=grid, infidelity=infid,
                      phase_error=phase, leakage=leak, meta=meta)
