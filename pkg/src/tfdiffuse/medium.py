"""Propagation medium."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Medium:
    """Density ``rho`` (kg/m^3) and sound speed ``c`` (m/s); defaults are air at 20 C."""

    rho: float = 1.21
    c: float = 343.0

    def __post_init__(self):
        if not (self.rho > 0 and self.c > 0):
            raise DomainError("density and sound speed must be positive")

    @property
    def Z0(self):
        return self.rho * self.c

    def wavenumber(self, frequency):
        return 2.0 * np.pi * np.asarray(frequency, dtype=float) / self.c


AIR = Medium()
