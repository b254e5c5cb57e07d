"""Oscillating densities from closed classical orbits.

Every orbit gamma through r contributes

    A_gamma cos(S_gamma/hbar - mu_gamma pi/2 - 3 pi/4)

to delta rho, with S = p L and A = 2m/(p pi sqrt(2 pi hbar) T |J|^(1/2))
times the orbit degeneracy.  delta tau carries the extra factor p^2/2m
and delta tau1 a further factor Q.  Near bifurcations the isolated terms
diverge and are replaced by uniform approximations built from the same
orbits; a plan assigns each orbit family to exactly one regime on each
interval of radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import orbits as orb
from .quantum import smooth_fermi_energy, tf_densities
from .specfun import bessel_j
from .units import HBAR, MASS, R

__all__ = [
    "Amplitude",
    "DivergentAmplitude",
    "OverlapError",
    "GhostUnavailable",
    "Regime",
    "Region",
    "UniformPlan",
    "TruncationConfig",
    "amplitude",
    "isolated_contribution",
    "uniform_radial_sb",
    "uniform_diameter_sb",
    "uniform_pitchfork",
    "friedel_boundary",
    "friedel_isolated",
    "build_plan",
    "delta_density",
    "delta_profile",
    "tf_densities",
    "shell_correction_semiclassical",
]

GhostUnavailable = orb.GhostUnavailable
KINETIC = ("tau", "tau1", "xi")
CHANNELS = ("rho",) + KINETIC
JACOBIAN_FLOOR = 1e-12
# within LIMIT_WINDOW of a bifurcation point the pitchfork formula is
# replaced by its analytic limit, whose Taylor data are fitted from
# samples LIMIT_FIT_STEP apart
LIMIT_WINDOW = 1e-6 * R
LIMIT_FIT_STEP = 5e-4 * R
R_ZERO = 1e-7 * R


class DivergentAmplitude(ArithmeticError):
    """Isolated amplitude requested where the Jacobian vanishes."""


class OverlapError(ValueError):
    """Two bifurcations of one family lie too close in action."""


# ---------------------------------------------------------------- amplitudes

@dataclass(frozen=True)
class Amplitude:
    value: float
    orbit: orb.OrbitInstance


def _amp(length, jacobian, degeneracy, p):
    """2m/(p pi sqrt(2 pi hbar) T |J|^(1/2)) * degeneracy with T = m L / p."""
    period = MASS * np.asarray(length) / p
    with np.errstate(divide="ignore"):
        return 2.0 * MASS / (p * math.pi * math.sqrt(2 * math.pi * HBAR) * period) / np.sqrt(np.abs(jacobian)) * degeneracy


def amplitude(inst: orb.OrbitInstance) -> Amplitude:
    if abs(inst.jacobian) < JACOBIAN_FLOOR:
        raise DivergentAmplitude(f"{inst.cls.label} at r={inst.r}: |J| < {JACOBIAN_FLOOR}")
    return Amplitude(float(_amp(inst.length, inst.jacobian, inst.degeneracy, inst.p)), inst)


def _channel_factor(channel: str, p: float):
    if channel == "rho":
        return 1.0
    if channel in KINETIC:
        return p * p / (2 * MASS)
    raise ValueError(f"unknown channel {channel!r}")


def _weights(channel: str, q):
    """Per-orbit factor that multiplies the rho amplitude in a channel."""
    q = np.asarray(q, dtype=float)
    if channel in ("rho", "tau"):
        return np.ones_like(q)
    if channel == "tau1":
        return q
    return 0.5 * (1.0 + q)


def isolated_contribution(inst: orb.OrbitInstance, channel: str = "rho") -> float:
    """The single-orbit summand of delta rho, delta tau or delta tau1 at inst.r."""
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    if inst.morse is None:
        raise ValueError(f"{inst.cls.label} at r={inst.r} has no Morse index")
    a = amplitude(inst).value
    phase = inst.action / HBAR - inst.morse * math.pi / 2 - 3 * math.pi / 4
    return float(a * _channel_factor(channel, inst.p) * _weights(channel, inst.q_mismatch) * math.cos(phase))


def _isolated_arrays(o: orb.OrbitArrays, mu: int, p: float, channel: str):
    a = _amp(o.length, o.jacobian, o.degeneracy, p) * _weights(channel, o.q_mismatch)
    return _channel_factor(channel, p) * a * np.cos(p * o.length / HBAR - mu * math.pi / 2 - 3 * math.pi / 4)


# ------------------------------------------------- radial symmetry breaking

def _radial_sb_term(r: np.ndarray, k: int, p: float, channel: str) -> np.ndarray:
    v = 2 * k + 1
    x = 2 * r * p / HBAR
    s0 = 2 * p * v * R / HBAR
    if channel == "xi":
        return np.zeros_like(r)
    sign_q = -1.0 if channel == "tau1" else 1.0
    out = np.empty_like(r)
    zero = r <= 0.0
    # r -> 0: sqrt(4 pi r p) A_bar -> p/(pi v R hbar), and the J1 term drops
    out[zero] = p / (math.pi * v * R * HBAR) * math.cos(s0)
    rr = r[~zero]
    plus = orb.radial_arrays(k, "+", rr, p)
    minus = orb.radial_arrays(k, "-", rr, p)
    a_p = _amp(plus.length, plus.jacobian, 1, p)
    a_m = _amp(minus.length, minus.jacobian, 1, p)
    a_bar = 0.5 * (a_p + a_m)
    d_a = 0.5 * (a_m - a_p)
    xx = x[~zero]
    out[~zero] = np.sqrt(4 * math.pi * rr * p / HBAR) * (
        a_bar * bessel_j(0, xx) * math.cos(s0) - d_a * bessel_j(1, xx) * math.sin(s0)
    )
    return (-1) ** k * sign_q * _channel_factor(channel, p) * out


def uniform_radial_sb(r, k_max: int, p: float, channel: str = "rho", k_min: int = 0):
    """Uniform sum over the radial pairs L+(k), L-(k) for k_min <= k <= k_max.

    Finite at r = 0, where the closed-form limit is used.
    """
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr < 0) or np.any(arr > R):
        raise ValueError("r must lie in [0, R]")
    total = np.zeros_like(arr)
    for k in range(k_min, k_max + 1):
        total += _radial_sb_term(arr, k, p, channel)
    return float(total[0]) if np.ndim(r) == 0 else total


# ----------------------------------------------- diameter symmetry breaking

def _diameter_term(r: np.ndarray, k: int, p: float, channel: str) -> np.ndarray:
    rr = np.maximum(r, R_ZERO)
    npo = orb.npo_arrays(2 * k, k, rr, p)
    po = orb.po_arrays(2 * k, k, rr, p)
    # L_npo - 4kR = 2(r sin(2k alpha) - 4kR sin^2(alpha/2)), free of cancellation as r -> 0
    a = npo.alpha
    ds = p / HBAR * (rr * np.sin(2 * k * a) - 4 * k * R * np.sin(0.5 * a) ** 2)
    s_bar = p * po.length / HBAR + ds
    a_npo = _amp(npo.length, npo.jacobian, npo.degeneracy, p) * _weights(channel, npo.q_mismatch)
    a_po = _amp(po.length, po.jacobian, po.degeneracy, p) * _weights(channel, po.q_mismatch)
    a_bar = 0.5 * (a_po + a_npo)
    d_a = 0.5 * (a_po - a_npo)
    # mu0 sits halfway between the PO (3v - 1) and NPO (3v) Morse indices
    mu0 = 6 * k - 0.5
    phi = s_bar - mu0 * math.pi / 2 - 3 * math.pi / 4
    pref = np.sqrt(2 * math.pi * ds)
    return _channel_factor(channel, p) * pref * (a_bar * bessel_j(0, ds) * np.cos(phi) + d_a * bessel_j(1, ds) * np.sin(phi))


def uniform_diameter_sb(r, k_max: int, p: float, channel: str = "rho"):
    """Uniform sum over the diameter POs (2k, k) and their NPO partners.

    At r = 0 the formula is evaluated at r = 1e-7 R, where it agrees with
    its limit to O(1e-14 p^2).
    """
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr < 0) or np.any(arr > R):
        raise ValueError("r must lie in [0, R]")
    total = np.zeros_like(arr)
    for k in range(1, k_max + 1):
        total += _diameter_term(arr, k, p, channel)
    return float(total[0]) if np.ndim(r) == 0 else total


# ------------------------------------------------------------- pitchforks

def _pitchfork_core(s_par, a_par, s_chi, a_chi, sigma0, mu0):
    """Complex-Bessel uniform formula for a pitchfork bifurcation."""
    ds = 0.5 * (s_chi - s_par)
    s_bar = 0.5 * (s_chi + s_par)
    z = np.abs(ds)
    s1 = np.where(ds >= 0, 1.0, -1.0)
    a_bar = 0.5 * a_chi + a_par / math.sqrt(2)
    d_a = 0.5 * a_chi - a_par / math.sqrt(2)
    e = np.exp
    bracket = a_bar * (sigma0 * bessel_j(0.25, z) * e(1j * s1 * math.pi / 8) + bessel_j(-0.25, z) * e(-1j * s1 * math.pi / 8)) + d_a * (
        bessel_j(0.75, z) * e(3j * s1 * math.pi / 8) + sigma0 * bessel_j(-0.75, z) * e(-3j * s1 * math.pi / 8)
    )
    return np.real(np.sqrt(math.pi * z / 2) * e(1j * (s_bar - math.pi * mu0 / 2 - math.pi)) * bracket)


def _as_arrays(provider, r):
    """Call an orbit provider and return (length, jacobian, q, degeneracy) arrays."""
    o = provider(r)
    return np.asarray(o.length, dtype=float), np.asarray(o.jacobian, dtype=float), np.asarray(o.q_mismatch, dtype=float), o.degeneracy


def _pitchfork_eval(r, parent, child, r_b, mu0, p, channel):
    lp, jp, qp, gp = _as_arrays(parent, r)
    lc, jc, qc, gc = _as_arrays(child, r)
    a_par = _amp(lp, jp, gp, p) * _weights(channel, qp)
    a_chi = _amp(lc, jc, gc, p) * _weights(channel, qc)
    sigma0 = np.where(np.asarray(r) >= r_b, 1.0, -1.0)
    return _channel_factor(channel, p) * _pitchfork_core(p * lp / HBAR, a_par, p * lc / HBAR, a_chi, sigma0, mu0)


def _pitchfork_limit(parent, child, r_b, mu0, p, channel):
    """Value of the pitchfork formula at r = r_b.

    With eps = r - r_b, B = A sqrt|eps| is smooth for both orbits and
    dS = d2 eps^2.  Only the J_{-1/4} and J_{-3/4} terms survive; the
    latter needs the first-order coefficients of B.
    """
    eps = LIMIT_FIT_STEP * np.array([-4, -3, -2, -1, 1, 2, 3, 4], dtype=float)
    r = r_b + eps
    lp, jp, qp, gp = _as_arrays(parent, r)
    lc, jc, qc, gc = _as_arrays(child, r)
    b_p = _amp(lp, jp, gp, p) * _weights(channel, qp) * np.sqrt(np.abs(eps))
    b_c = _amp(lc, jc, gc, p) * _weights(channel, qc) * np.sqrt(np.abs(eps))
    fit = lambda y: np.polynomial.polynomial.polyfit(eps, y, 5)
    cp, cc = fit(b_p), fit(b_c)
    ds = fit(0.5 * p * (lc - lp) / HBAR)
    s_bar0 = fit(0.5 * p * (lc + lp) / HBAR)[0]
    d2 = ds[2]
    s1 = 1.0 if d2 >= 0 else -1.0
    lead = 2**0.25 / math.gamma(0.75) * abs(d2) ** 0.25 * (0.5 * cc[0] + cp[0] / math.sqrt(2)) * np.exp(-1j * s1 * math.pi / 8)
    corr = 2**0.75 / math.gamma(0.25) * abs(d2) ** -0.25 * (0.5 * cc[1] - cp[1] / math.sqrt(2)) * np.exp(-3j * s1 * math.pi / 8)
    val = np.real(math.sqrt(math.pi / 2) * np.exp(1j * (s_bar0 - math.pi * mu0 / 2 - math.pi)) * (lead + corr))
    return _channel_factor(channel, p) * val


def uniform_pitchfork(r, parent, child, r_b: float, mu0: int, p: float, channel: str = "rho"):
    """Uniform contribution of a parent orbit and the child born from it at r_b.

    ``parent`` and ``child`` map radii to objects with ``length``,
    ``jacobian``, ``q_mismatch`` and ``degeneracy`` (OrbitInstance or
    OrbitArrays).  The child must be continued as a real ghost for radii
    on the side where it does not exist.  mu0 is the smaller of the two
    Morse indices on the side where both orbits are real.  Within
    LIMIT_WINDOW of r_b the analytic limit is returned.
    """
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(arr)
    near = np.abs(arr - r_b) < LIMIT_WINDOW
    far = ~near
    if far.any():
        out[far] = _pitchfork_eval(arr[far], parent, child, r_b, mu0, p, channel)
    if near.any():
        out[near] = _pitchfork_limit(parent, child, r_b, mu0, p, channel)
    return float(out[0]) if np.ndim(r) == 0 else out


def pitchfork_closed_form(p: float) -> float:
    """Closed-form value quoted for the L+(1) -> (3,1) pitchfork at r = R/3, mu0 = 7."""
    return HBAR ** (-0.75) * 9 * p**0.75 * math.gamma(0.25) / (32 * math.pi**2 * R**1.25) * math.cos(16 * R * p / (3 * HBAR) - 5 * math.pi / 8)


# ----------------------------------------------------------- Friedel region

def friedel_boundary(r, p: float):
    """Uniform L+(0) contribution that stays finite at the wall."""
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr <= 0) or np.any(arr > R):
        raise ValueError("r must lie in (0, R]")
    d = R - arr
    x = 2 * d * p / HBAR
    # J1(x)/d = (2p/hbar) J1(x)/x, and J1(x)/x -> 1/2
    j1_over_x = np.where(x > 1e-8, bessel_j(1, x) / np.where(x > 1e-8, x, 1.0), 0.5 - x * x / 16)
    out = -p / (2 * math.pi * HBAR) * np.sqrt(R / arr) * (2 * p / HBAR) * j1_over_x
    return float(out[0]) if np.ndim(r) == 0 else out


def friedel_isolated(r, p: float):
    """Isolated L+(0) contribution that the Friedel form replaces."""
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    d = R - arr
    out = -1.0 / (2 * math.pi * d) * np.sqrt(p * R / (math.pi * arr * d)) * np.cos(2 * p * d / HBAR - 3 * math.pi / 4)
    return float(out[0]) if np.ndim(r) == 0 else out


# --------------------------------------------------------------------- plan

class Regime(str, Enum):
    RADIAL_SB = "SymmetryBreakingRadial"
    DIAMETER_SB = "SymmetryBreakingDiameter"
    PITCHFORK = "PitchforkUniform"
    FRIEDEL = "FriedelBoundary"
    ISOLATED = "IsolatedSum"


@dataclass(frozen=True)
class Region:
    lo: float
    hi: float
    regime: Regime
    family: str
    k: int | None = None
    parent: str | None = None
    child: str | None = None
    r_b: float | None = None
    mu0: int | None = None
    isolated: tuple[str, ...] = ()

    def contains(self, r):
        r = np.asarray(r)
        return (r > self.lo) & (r <= self.hi) if self.lo > 0 else (r >= self.lo) & (r <= self.hi)


@dataclass(frozen=True)
class TruncationConfig:
    k_max_radial: int = 2
    k_max_diameter: int = 10
    include_tangent_pairs: bool = False
    pitchfork_classes: tuple[tuple[int, int], ...] = ((3, 1), (5, 2))
    overlap_threshold: float = 1.0
    switch_fraction: float = 0.5
    tangent_v_max: int = 6
    tangent_guard: float = 5.0

    def __post_init__(self):
        if self.k_max_radial < 0 or self.k_max_diameter < 0:
            raise ValueError("family cutoffs must be >= 0")
        if not 0 < self.switch_fraction < 1:
            raise ValueError("switch_fraction must lie in (0, 1)")
        for v, w in self.pitchfork_classes:
            if not orb.is_radial_pitchfork_class(v, w):
                raise ValueError(f"({v},{w}) is not born from a radial orbit")

    def as_dict(self) -> dict:
        return {
            "k_max_radial": self.k_max_radial,
            "k_max_diameter": self.k_max_diameter,
            "include_tangent_pairs": self.include_tangent_pairs,
            "pitchfork_classes": [list(c) for c in self.pitchfork_classes],
            "overlap_threshold": self.overlap_threshold,
            "switch_fraction": self.switch_fraction,
        }


@dataclass(frozen=True)
class CriticalRadius:
    radius: float
    type: str
    family: str


@dataclass(frozen=True)
class UniformPlan:
    N: int
    p: float
    config: TruncationConfig
    critical_radii: tuple[CriticalRadius, ...]
    regions: tuple[Region, ...]
    tangent_classes: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def family_regions(self, family: str) -> list[Region]:
        return [reg for reg in self.regions if reg.family == family]

    @property
    def families(self) -> list[str]:
        seen = []
        for reg in self.regions:
            if reg.family not in seen:
                seen.append(reg.family)
        return seen


def _switch(a: float, b: float, frac: float) -> float:
    return a + frac * (b - a)


def _pitchfork_mu0(parent_mu: int, child_mu: int) -> int:
    return min(parent_mu, child_mu)


def _radial_chain_mu0(k: int) -> tuple[int, int]:
    """mu0 of the L+(k) -> NPO and NPO -> PO pitchforks of class (2k+1, k)."""
    v = 2 * k + 1
    r_k = R / v
    r_c = orb.po_caustic(v, k)
    r1 = 0.5 * (r_k + r_c)
    npo1 = orb.npo_branch(v, k, r1, 1.0, with_morse=True)
    mu_a = _pitchfork_mu0(orb.radial_morse(k, "+", r1), npo1.morse)
    r2 = 0.5 * (r_c + R)
    npo2 = orb.npo_branch(v, k, r2, 1.0, with_morse=True)
    po2 = orb.po_properties(v, k, r2, 1.0)
    mu_b = _pitchfork_mu0(npo2.morse, po2.morse)
    return mu_a, mu_b


def build_plan(N: int, config: TruncationConfig | None = None) -> UniformPlan:
    """Critical radii and the regime assigned to each orbit family on each interval."""
    config = config or TruncationConfig()
    lam = smooth_fermi_energy(N)
    p = math.sqrt(2 * MASS * lam) / HBAR
    frac = config.switch_fraction
    active = [c for c in config.pitchfork_classes if (c[0] - 1) // 2 <= config.k_max_radial]
    for k in range(1, config.k_max_radial + 1):
        if (2 * k + 1, k) not in active:
            raise ValueError(f"radial family k={k} needs pitchfork class ({2 * k + 1},{k})")

    crit = [CriticalRadius(0.0, "symmetry-breaking", "radial"), CriticalRadius(R, "boundary", "radial-0")]
    regions: list[Region] = []

    # k = 0: symmetry breaking at the centre, Friedel form near the wall
    sw = _switch(0.0, R, frac)
    regions.append(Region(0.0, sw, Regime.RADIAL_SB, "radial-0", k=0))
    regions.append(Region(sw, R, Regime.FRIEDEL, "radial-0", k=0, isolated=("L-(0)",)))

    for k in range(1, config.k_max_radial + 1):
        v = 2 * k + 1
        fam = f"radial-{k}"
        r_k = R / v
        r_c = orb.po_caustic(v, k)
        crit.append(CriticalRadius(r_k, "pitchfork", fam))
        crit.append(CriticalRadius(r_c, "pitchfork", fam))
        gap = p * abs(orb.npo_branch(v, k, r_c, p).length - 2 * (v * R - r_k)) / HBAR
        if gap < config.overlap_threshold:
            raise OverlapError(f"({v},{k}): bifurcations at {r_k:.6g}R and {r_c:.6g}R differ by only {gap:.3g} hbar in action")
        mu_a, mu_b = _radial_chain_mu0(k)
        s1 = _switch(0.0, r_k, frac)
        s2 = _switch(r_k, r_c, frac)
        regions.append(Region(0.0, s1, Regime.RADIAL_SB, fam, k=k))
        regions.append(Region(s1, s2, Regime.PITCHFORK, fam, k=k, parent=f"L+({k})", child=f"NPO({v},{k})",
                              r_b=r_k, mu0=mu_a, isolated=(f"L-({k})",)))
        regions.append(Region(s2, R, Regime.PITCHFORK, fam, k=k, parent=f"NPO({v},{k})", child=f"PO({v},{k})",
                              r_b=r_c, mu0=mu_b, isolated=(f"L+({k})", f"L-({k})")))

    if config.k_max_diameter >= 1:
        regions.append(Region(0.0, R, Regime.DIAMETER_SB, "diameter", k=config.k_max_diameter))

    tangent = []
    if config.include_tangent_pairs:
        for v in range(4, config.tangent_v_max + 1):
            for w in range(1, v // 2 + 1):
                if not orb.is_tangent_class(v, w):
                    continue
                r_t, _ = orb.tangent_bifurcation_point(v, w)
                r_c = orb.po_caustic(v, w)
                fam = f"tangent-{v},{w}"
                crit.append(CriticalRadius(r_t, "tangent", fam))
                crit.append(CriticalRadius(r_c, "pitchfork", fam))
                l_t = orb.solve_npo(v, w, r_t, p, with_morse=False)[0].length
                l_c = orb.npo_branch(v, w, r_c, p, "plain").length
                gap = p * abs(l_c - l_t) / HBAR
                if gap < config.overlap_threshold:
                    raise OverlapError(f"({v},{w}): tangent point {r_t:.6g}R and caustic {r_c:.6g}R differ by only {gap:.3g} hbar in action")
                tangent.append((v, w))
                regions.append(Region(0.0, R, Regime.ISOLATED, fam))

    crit.sort(key=lambda c: c.radius)
    return UniformPlan(N=N, p=p, config=config, critical_radii=tuple(crit), regions=tuple(regions), tangent_classes=tuple(tangent))


# ---------------------------------------------------------------- assembly

def _radial_provider(k, sign, p):
    return lambda r: orb.radial_arrays(k, sign, r, p)


def _npo_provider(v, w, p):
    return lambda r: orb.npo_arrays(v, w, r, p, continue_ghost=True)


def _po_provider(v, w, p):
    return lambda r: orb.po_arrays(v, w, r, p)


def _region_values(reg: Region, r: np.ndarray, p: float, channel: str, guard: float = 5.0) -> np.ndarray:
    if reg.regime is Regime.RADIAL_SB:
        return _radial_sb_term(r, reg.k, p, channel)
    if reg.regime is Regime.DIAMETER_SB:
        return uniform_diameter_sb(r, reg.k, p, channel)
    if reg.regime is Regime.FRIEDEL:
        lm = orb.radial_arrays(0, "-", r, p)
        out = _isolated_arrays(lm, orb.radial_morse(0, "-", 0.5), p, channel)
        # Q = -1 for radial orbits, so tau1 = -tau and xi gets nothing
        q = {"rho": 1.0, "tau": 1.0, "tau1": -1.0, "xi": 0.0}[channel]
        return out + q * _channel_factor(channel, p) * friedel_boundary(r, p)
    if reg.regime is Regime.PITCHFORK:
        k = reg.k
        v = 2 * k + 1
        if reg.parent.startswith("L+"):
            parent, child = _radial_provider(k, "+", p), _npo_provider(v, k, p)
        else:
            parent, child = _npo_provider(v, k, p), _po_provider(v, k, p)
        out = uniform_pitchfork(r, parent, child, reg.r_b, reg.mu0, p, channel)
        for name in reg.isolated:
            sign = "+" if name.startswith("L+") else "-"
            o = orb.radial_arrays(k, sign, r, p)
            # above R/(2k+1) the Morse index of L+(k) no longer changes
            out = out + _isolated_arrays(o, orb.radial_morse(k, sign, R), p, channel)
        return out
    if reg.regime is Regime.ISOLATED:
        v, w = (int(t) for t in reg.family.split("-")[1].split(","))
        return _tangent_values(v, w, r, p, channel, guard)
    raise ValueError(reg.regime)


def _tangent_values(v: int, w: int, r: np.ndarray, p: float, channel: str, guard: float = 5.0) -> np.ndarray:
    """Isolated tangent-pair NPOs and their PO, outside a guard band in action."""
    r_t, _ = orb.tangent_bifurcation_point(v, w)
    r_c = orb.po_caustic(v, w)
    l_t = orb.solve_npo(v, w, r_t, p, with_morse=False)[0].length
    out = np.zeros_like(r)
    for i, ri in enumerate(r):
        if ri <= r_t or ri >= R:
            continue
        for inst in orb.solve_npo(v, w, ri, p):
            if inst.morse is None or abs(inst.jacobian) < JACOBIAN_FLOOR:
                continue
            if p * abs(inst.length - l_t) < guard * HBAR:
                continue
            if inst.cls.branch == "plain" and p * abs(inst.length - orb.po_properties(v, w, r_c, p, False).length) < guard * HBAR:
                continue
            out[i] += isolated_contribution(inst, channel)
        if ri > r_c:
            po = orb.po_properties(v, w, ri, p)
            if po.morse is not None and not _near_caustic(po, p, guard):
                out[i] += isolated_contribution(po, channel)
    return out


def _near_caustic(po: orb.OrbitInstance, p: float, guard: float) -> bool:
    # the PO action is constant; use the accompanying NPO action as the measure
    npo = orb.npo_branch(po.cls.v, po.cls.w, po.r, p, "plain")
    return npo is None or p * abs(npo.length - po.length) < guard * HBAR


def delta_profile(r, N: int, channel: str = "rho", config: TruncationConfig | None = None, plan: UniformPlan | None = None):
    """Semiclassical oscillating density on an array of radii.

    Kinetic channels are set to NaN for r > R - hbar/p, where no
    uniform boundary form is available.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    plan = plan or build_plan(N, config)
    p = plan.p
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr < 0) or np.any(arr > R):
        raise ValueError("r must lie in [0, R]")
    total = np.zeros_like(arr)
    for reg in plan.regions:
        mask = reg.contains(arr)
        if mask.any():
            total[mask] += _region_values(reg, arr[mask], p, channel, plan.config.tangent_guard)
    if channel in KINETIC:
        total[arr > R - HBAR / p] = np.nan
    return total


def delta_density(r, N: int, channel: str = "rho", config: TruncationConfig | None = None):
    out = delta_profile(r, N, channel, config)
    return float(out[0]) if np.ndim(r) == 0 else out


def boundary_truncation(N: int) -> float:
    """Radius beyond which kinetic-channel profiles are not produced."""
    return R - HBAR / math.sqrt(2 * MASS * smooth_fermi_energy(N))


# ----------------------------------------------------------- shell energy

def shell_correction_semiclassical(N: int, v_max: int = 10, w_max: int = 3) -> float:
    """Periodic-orbit sum for the shell-correction energy, truncated at v_max, w_max."""
    if v_max < 2 or w_max < 1:
        raise ValueError("need v_max >= 2 and w_max >= 1")
    lam = smooth_fermi_energy(N)
    p = math.sqrt(lam)
    e0 = HBAR**2 / (2 * MASS * R**2)
    total = 0.0
    for w in range(1, w_max + 1):
        for v in range(2 * w, v_max + 1):
            f = 1.0 if v == 2 * w else 2.0
            s = math.sin(w * math.pi / v)
            length = 2 * v * R * s
            total += f / (v * v * math.sqrt(math.pi * v * s)) * math.sin(p * length - 3 * v * math.pi / 2 + 3 * math.pi / 4)
    return 2 * e0**0.25 * lam**0.75 * total
