"""Physical units: lattice recoil energy and conversion of dimensionless
gate times (hbar = 1, energies in units of J) to seconds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.constants as const

from ..core import ValidationError


@dataclass(frozen=True)
class LatticeUnits:
    wavelength: float   # m
    mass: float         # kg

    def __post_init__(self):
        if not (self.wavelength > 0 and self.mass > 0):
            raise ValidationError("wavelength and mass must be positive")

    @property
    def recoil_energy(self) -> float:
        """E_R = hbar^2 (2 pi)^2 / (2 m lambda^2) in joules."""
        return const.hbar ** 2 * (2 * np.pi) ** 2 / (2 * self.mass * self.wavelength ** 2)

    def time_from_energy(self, t_dimensionless: float, energy_in_ER: float) -> float:
        """Seconds for a time given in units of hbar / (energy_in_ER * E_R)."""
        if energy_in_ER <= 0:
            raise ValidationError("energy scale must be positive")
        return t_dimensionless * const.hbar / (energy_in_ER * self.recoil_energy)


def na_514() -> LatticeUnits:
    """Sodium atoms in a 514 nm optical lattice."""
    return LatticeUnits(wavelength=514e-9, mass=22.98976928 * const.atomic_mass)
