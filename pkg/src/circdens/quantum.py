"""Exact quantum mechanics of the disk billiard.

Eigenstates are psi_nl = c_nl J_l(z_nl r/R) exp(i l phi) with
E_nl = z_nl^2 E0 and c_nl = 1/(sqrt(pi) R J_{l+1}(z_nl)).  Levels with
l != 0 are paired with -l, so together with spin a level carries
degeneracy 2 (l = 0) or 4 (l > 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .specfun import bessel_zero
from .units import E0, R

CHANNELS = ("rho", "tau", "tau1", "xi", "delta_rho", "delta_tau", "delta_tau1", "delta_xi")


class OpenShellError(ValueError):
    """N does not close a degenerate multiplet."""

    def __init__(self, N: int, lower: int | None, upper: int | None):
        self.N = N
        self.lower = lower
        self.upper = upper
        super().__init__(f"N={N} splits a degenerate level; nearest valid particle numbers are {lower} and {upper}")


@dataclass(frozen=True, order=True)
class Level:
    energy: float
    l: int
    n: int
    degeneracy: int = field(compare=False)

    @property
    def z(self) -> float:
        return math.sqrt(self.energy / E0)


@dataclass(frozen=True)
class QuantumSpectrum:
    levels: tuple[Level, ...]
    e_max: float

    def __len__(self):
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lev.energy for lev in self.levels])

    @property
    def degeneracies(self) -> np.ndarray:
        return np.array([lev.degeneracy for lev in self.levels], dtype=int)


@dataclass(frozen=True)
class DensityProfile:
    grid: np.ndarray
    values: np.ndarray
    channel: str
    N: int

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) != len(self.values):
            raise ValueError("grid and values must be 1-d and of equal length")
        if np.any(np.diff(g) <= 0) or g[0] < 0 or g[-1] > R:
            raise ValueError("grid must be strictly increasing inside [0, R]")


def build_spectrum(e_max: float) -> QuantumSpectrum:
    """All levels with z_nl^2 E0 <= e_max, sorted by energy."""
    if e_max <= 0:
        raise ValueError("e_max must be positive")
    levels = _levels_below(float(e_max))
    return QuantumSpectrum(levels=levels, e_max=float(e_max))


@lru_cache(maxsize=16)
def _levels_below(e_max: float) -> tuple[Level, ...]:
    zmax = math.sqrt(e_max / E0)
    out = []
    l = 0
    # the first zero of J_l exceeds l
    while l < zmax:
        n = 0
        while True:
            z = bessel_zero(l, n)
            if z > zmax:
                break
            out.append(Level(energy=z * z * E0, l=l, n=n, degeneracy=2 if l == 0 else 4))
            n += 1
        if n == 0:
            break
        l += 1
    out.sort()
    return tuple(out)


def smooth_counting(E):
    """Weyl counting function E/2E0 - sqrt(E/E0) + 1/3 (spin included)."""
    E = np.asarray(E, dtype=float)
    val = E / (2 * E0) - np.sqrt(E / E0) + 1.0 / 3.0
    return float(val) if val.ndim == 0 else val


counting_weyl = smooth_counting


def smooth_fermi_energy(N: float) -> float:
    """Smooth Fermi energy solving counting_weyl(lam) = N.

    With s = sqrt(lam/E0) the Weyl condition is the quadratic
    s^2/2 - s + 1/3 - N = 0, whose larger root is taken.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    s = 1.0 + math.sqrt(2.0 * N + 1.0 / 3.0)
    return s * s * E0


def fermi_momentum(N: float) -> float:
    """p_lambda = sqrt(2 m lambda~) for the smooth Fermi energy."""
    return math.sqrt(smooth_fermi_energy(N) / E0) / R


def _spectrum_for(N: int) -> QuantumSpectrum:
    lam = smooth_fermi_energy(max(N, 2))
    e_max = lam + 8.0 * math.sqrt(lam) + 50.0
    while True:
        spec = build_spectrum(e_max)
        if spec.degeneracies.sum() >= N + 4:
            return spec
        e_max *= 1.5


def fermi_energy(N: int) -> tuple[float, list[Level]]:
    """Fermi energy and occupied levels for a closed-subshell particle number."""
    if N < 2 or N % 2:
        raise ValueError("N must be an even integer >= 2")
    spec = _spectrum_for(N)
    cum = np.cumsum(spec.degeneracies)
    i = int(np.searchsorted(cum, N))
    if cum[i] != N:
        lower = int(cum[i - 1]) if i > 0 else None
        raise OpenShellError(N, lower, int(cum[i]))
    filled = list(spec.levels[: i + 1])
    return filled[-1].energy, filled


def is_closed(N: int) -> bool:
    try:
        fermi_energy(N)
    except (OpenShellError, ValueError):
        return False
    return True


def valid_particle_numbers(n_max: int) -> list[int]:
    """All closed-subshell N <= n_max."""
    spec = _spectrum_for(n_max)
    cum = np.cumsum(spec.degeneracies)
    return [int(c) for c in cum if c <= n_max]


def counting_exact(E: float) -> int:
    """N(E) = number of states (spin included) with E_j <= E."""
    if E < 0:
        raise ValueError("E must be >= 0")
    return int(counting_exact_array(np.array([E]))[0])


def counting_exact_array(E) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    spec = build_spectrum(float(E.max()) + 1.0)
    cum = np.concatenate([[0], np.cumsum(spec.degeneracies)])
    return cum[np.searchsorted(spec.energies, E, side="right")]


# ---------------------------------------------------------------- densities

def _level_arrays(filled):
    z = np.array([lev.z for lev in filled])
    l = np.array([lev.l for lev in filled])
    g = np.array([lev.degeneracy for lev in filled], dtype=float)
    c2 = 1.0 / (math.pi * R**2 * special.jv(l + 1, z) ** 2)
    return z, l, g, c2


def _radial_terms(r, filled):
    """J_l, J_l' and (l/x) J_l at x = z r/R for every filled level.

    Returns arrays of shape (levels, radii) plus the level arrays.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0) or np.any(r > R * (1 + 1e-12)):
        raise ValueError("radii must lie in [0, R]")
    z, l, g, c2 = _level_arrays(filled)
    x = np.outer(z, r) / R
    lcol = l[:, None]
    jl = special.jv(lcol, x)
    jm = special.jv(lcol - 1, x)
    jp = special.jv(lcol + 1, x)
    djl = 0.5 * (jm - jp)
    # l J_l(x)/x = (J_{l-1} + J_{l+1})/2, regular at x = 0
    ljl_over_x = np.where(lcol == 0, 0.0, 0.5 * (jm + jp))
    return jl, djl, ljl_over_x, z, g, c2


def _sum(weights, terms):
    return np.einsum("i,ij->j", weights, terms)


def densities(r, N: int) -> dict[str, np.ndarray]:
    """rho, tau, tau1, xi at the radii ``r`` for N particles.

    Units hbar^2/2m = R = 1; spin and +-l degeneracy are included.
    """
    _, filled = fermi_energy(N)
    jl, djl, ljx, z, g, c2 = _radial_terms(r, filled)
    w = g * c2
    kz2 = (z / R) ** 2
    rho = _sum(w, jl**2)
    tau = _sum(w * kz2, jl**2)
    tau1 = _sum(w * kz2, djl**2 + ljx**2)
    return {"rho": rho, "tau": tau, "tau1": tau1, "xi": 0.5 * (tau + tau1)}


def laplacian_rho(r, N: int) -> np.ndarray:
    """Analytic radial Laplacian of rho.

    For u = J_l(kr)^2:  lap u = 2 k^2 [J_l'^2 + (l^2/x^2 - 1) J_l^2].
    """
    _, filled = fermi_energy(N)
    jl, djl, ljx, z, g, c2 = _radial_terms(r, filled)
    kz2 = (z / R) ** 2
    return _sum(g * c2 * 2 * kz2, djl**2 + ljx**2 - jl**2)


def _scalar_or_array(r, arr):
    return float(arr[0]) if np.ndim(r) == 0 else arr


def density_rho(r, N: int):
    return _scalar_or_array(r, densities(r, N)["rho"])


def density_tau(r, N: int):
    return _scalar_or_array(r, densities(r, N)["tau"])


def density_tau1(r, N: int):
    return _scalar_or_array(r, densities(r, N)["tau1"])


def density_xi(r, N: int):
    return _scalar_or_array(r, densities(r, N)["xi"])


def tf_densities(N: int) -> tuple[float, float]:
    """Constant Thomas-Fermi densities (rho_TF, tau_TF).

    Never renormalised: rho_TF * pi R^2 differs from N.
    """
    lam = smooth_fermi_energy(N)
    rho_tf = lam / (2 * math.pi * R**2 * E0)
    tau_tf = lam**2 / (4 * math.pi * R**2 * E0)
    return rho_tf, tau_tf


def oscillating_densities(r, N: int) -> dict[str, np.ndarray]:
    """Quantum densities minus their TF parts."""
    full = densities(r, N)
    rho_tf, tau_tf = tf_densities(N)
    return {
        "delta_rho": full["rho"] - rho_tf,
        "delta_tau": full["tau"] - tau_tf,
        "delta_tau1": full["tau1"] - tau_tf,
        "delta_xi": full["xi"] - tau_tf,
    }


def profile(grid, N: int, channel: str) -> DensityProfile:
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    grid = np.asarray(grid, dtype=float)
    if channel.startswith("delta_"):
        vals = oscillating_densities(grid, N)[channel]
    else:
        vals = densities(grid, N)[channel]
    return DensityProfile(grid=grid, values=vals, channel=channel, N=N)


# ---------------------------------------------------------- shell energies

def smooth_energy_integral(lam: float) -> float:
    """2 int_0^lam E g~(E) dE with the Weyl level density, in closed form."""
    return lam**2 / (4 * E0) - lam**1.5 / (3 * math.sqrt(E0))


def shell_correction_exact(N: int) -> float:
    """delta E_tot = sum of occupied energies minus its smooth Weyl counterpart."""
    _, filled = fermi_energy(N)
    total = sum(lev.degeneracy * lev.energy for lev in filled)
    return total - smooth_energy_integral(smooth_fermi_energy(N))
