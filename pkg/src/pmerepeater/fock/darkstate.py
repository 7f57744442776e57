"""Dark state of the T -> S conversion Hamiltonian.

In the symmetric single-excitation sector the atom-cavity Hamiltonian
couples ``|S,1>`` and ``|T,0>`` through the excited collective state
``|E2,0>`` with collective couplings ``g`` and ``omega_c2`` (hbar = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BASIS = ("S,1", "E2,0", "T,0")


@dataclass(frozen=True)
class DarkStateSystem:
    g: float
    omega_c2: float

    def __post_init__(self):
        if self.g < 0 or self.omega_c2 < 0:
            raise ValueError("couplings must be non-negative")
        if self.g == 0 and self.omega_c2 == 0:
            raise ValueError("g and omega_c2 cannot both vanish")

    @property
    def theta(self) -> float:
        """Mixing angle with ``tan(theta) = g / omega_c2``."""
        return math.atan2(self.g, self.omega_c2)

    def hamiltonian(self) -> np.ndarray:
        h = np.zeros((3, 3))
        h[1, 0] = h[0, 1] = self.g
        h[1, 2] = h[2, 1] = self.omega_c2
        return h

    def dark_state(self) -> np.ndarray:
        """``cos(theta)|S,1> - sin(theta)|T,0>``."""
        th = self.theta
        return np.array([math.cos(th), 0.0, -math.sin(th)])


def dark_state_check(system: DarkStateSystem) -> tuple[float, float]:
    """Return ``(||H|D>||, theta)``."""
    residual = float(np.linalg.norm(system.hamiltonian() @ system.dark_state()))
    return residual, system.theta
