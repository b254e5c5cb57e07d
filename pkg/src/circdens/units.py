"""Unit system shared by every module.

Everything is measured with hbar^2/2m = R = 1, so the energy unit
E0 = hbar^2/(2 m R^2) is 1 as well and the Fermi momentum is
p = sqrt(2 m E) = sqrt(E).
"""

HBAR = 1.0
MASS = 0.5
R = 1.0
E0 = HBAR**2 / (2.0 * MASS * R**2)


def momentum(energy: float) -> float:
    """Classical momentum at kinetic energy ``energy``."""
    return (2.0 * MASS * energy) ** 0.5
