"""Closed classical orbits of the disk billiard.

An orbit starting at distance r from the centre leaves at angle beta to
the (inward) radius vector, hits the wall v times under the reflection
angle alpha and winds w times around the centre.  Non-periodic orbits
(NPOs) return with beta' = beta, which fixes

    beta = (1 - w) pi + (v - 1) pi/2 - v alpha,
    r(alpha) = (-1)^w R sin(alpha) / cos(v pi/2 - v alpha).

Periodic orbits (POs) return with beta' = pi - beta and have the fixed
reflection angle alpha = pi/2 - w pi/v.

All Jacobians take the Fermi momentum ``p`` explicitly because they
scale as 1/p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import optimize

from .units import MASS, R

SCAN_POINTS = 40_000
ROOT_XTOL = 1e-13
CRITICAL_TOL = 1e-9


class CriticalStartError(ValueError):
    """Morse index requested at a caustic, conjugate or reflection point."""


class GhostUnavailable(ValueError):
    """No real analytic continuation exists for this orbit class."""


class Kind(str, Enum):
    RADIAL_PLUS = "radial+"
    RADIAL_MINUS = "radial-"
    NPO = "npo"
    PO = "po"


@dataclass(frozen=True)
class OrbitClass:
    kind: Kind
    v: int
    w: int
    branch: str = "plain"

    def __post_init__(self):
        v, w = self.v, self.w
        if self.kind is Kind.PO and not (w >= 1 and v >= 2 * w):
            raise ValueError(f"no periodic orbit ({v},{w})")
        if self.kind is Kind.NPO:
            if not (v >= 2 and 1 <= w <= v // 2):
                raise ValueError(f"no non-radial NPO ({v},{w})")
            if self.branch not in ("plain", "primed"):
                raise ValueError(f"unknown branch {self.branch!r}")
            if self.branch == "primed" and not is_tangent_class(v, w):
                raise ValueError(f"({v},{w}) has no primed branch")
        if self.kind is Kind.RADIAL_PLUS and not (v % 2 == 1 and w == (v - 1) // 2):
            raise ValueError("radial '+' orbits have (v, w) = (2k+1, k)")
        if self.kind is Kind.RADIAL_MINUS and not (v % 2 == 1 and w == (v + 1) // 2):
            raise ValueError("radial '-' orbits have (v, w) = (2k+1, k+1)")

    @classmethod
    def radial(cls, k: int, sign: str) -> "OrbitClass":
        if k < 0:
            raise ValueError("k must be >= 0")
        if sign == "+":
            return cls(Kind.RADIAL_PLUS, 2 * k + 1, k)
        if sign == "-":
            return cls(Kind.RADIAL_MINUS, 2 * k + 1, k + 1)
        raise ValueError("sign must be '+' or '-'")

    @classmethod
    def npo(cls, v: int, w: int, branch: str = "plain") -> "OrbitClass":
        return cls(Kind.NPO, v, w, branch)

    @classmethod
    def po(cls, v: int, w: int) -> "OrbitClass":
        return cls(Kind.PO, v, w)

    @property
    def k(self) -> int | None:
        """Repetition number of a radial orbit."""
        if self.kind in (Kind.RADIAL_PLUS, Kind.RADIAL_MINUS):
            return (self.v - 1) // 2
        return None

    @property
    def label(self) -> str:
        if self.kind is Kind.RADIAL_PLUS:
            return f"L+({self.k})"
        if self.kind is Kind.RADIAL_MINUS:
            return f"L-({self.k})"
        if self.kind is Kind.PO:
            return f"PO({self.v},{self.w})"
        prime = "'" if self.branch == "primed" else ""
        return f"NPO({self.v},{self.w}){prime}"


@dataclass(frozen=True)
class OrbitInstance:
    cls: OrbitClass
    r: float
    alpha: complex | float
    beta: complex | float
    length: float
    jacobian: float
    q_mismatch: float
    p: float
    degeneracy: int
    morse: int | None = None
    ghost: bool = False

    @property
    def action(self) -> float:
        return self.p * self.length

    @property
    def period(self) -> float:
        return MASS * self.length / self.p


class BifurcationType(str, Enum):
    SYMMETRY_BREAKING = "symmetry-breaking"
    PITCHFORK = "pitchfork"
    TANGENT = "tangent"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class BifurcationEvent:
    radius: float
    type: BifurcationType
    parent: OrbitClass | None
    children: tuple[OrbitClass, ...] = field(default_factory=tuple)


# ------------------------------------------------------------ class algebra

def is_diameter_class(v: int, w: int) -> bool:
    return v == 2 * w


def is_radial_pitchfork_class(v: int, w: int) -> bool:
    return v == 2 * w + 1


def is_tangent_class(v: int, w: int) -> bool:
    return v >= 2 and 1 <= w <= v // 2 and not is_diameter_class(v, w) and not is_radial_pitchfork_class(v, w)


def po_half_angle(v: int, w: int) -> float:
    return w * math.pi / v


def po_caustic(v: int, w: int) -> float:
    """Radius R cos(w pi/v) at which the PO family (v, w) is born."""
    return R * math.cos(po_half_angle(v, w))


def beta_npo(v: int, w: int, alpha):
    return (1 - w) * math.pi + (v - 1) * math.pi / 2 - v * alpha


def alpha_window(v: int, w: int) -> tuple[float, float]:
    """Reflection angles that keep beta inside [0, pi]."""
    hi = ((1 - w) * math.pi + (v - 1) * math.pi / 2) / v
    lo = hi - math.pi / v
    return max(lo, 0.0), min(hi, math.pi / 2)


def closure_radius(v: int, w: int, alpha):
    """r(alpha) of an NPO; may be negative or exceed R (unphysical)."""
    denom = np.cos(v * math.pi / 2 - v * np.asarray(alpha, dtype=float))
    with np.errstate(divide="ignore"):
        val = (-1) ** w * R * np.sin(alpha) / denom
    return float(val) if np.ndim(val) == 0 else val


def closure_slope(v: int, w: int, alpha):
    """dr/dalpha at fixed (v, w)."""
    b = beta_npo(v, w, np.asarray(alpha, dtype=float))
    val = R / np.sin(b) ** 2 * (np.cos(alpha) * np.sin(b) + v * np.sin(alpha) * np.cos(b))
    return float(val) if np.ndim(val) == 0 else val


# ---------------------------------------------------------- NPO properties

def _npo_length(v, r, alpha, beta):
    return 2.0 * (v * R * np.cos(alpha) + r * np.cos(beta))


def _npo_jacobian(v, r, alpha, beta, p):
    cb = np.cos(beta)
    return 2.0 * r / p * cb * (1.0 + v * r / R * cb / np.cos(alpha))


def _npo_q(beta):
    return -np.cos(2.0 * beta)


def npo_length(inst: OrbitInstance) -> float:
    return float(_npo_length(inst.cls.v, inst.r, inst.alpha, inst.beta))


def npo_jacobian(inst: OrbitInstance) -> float:
    return float(_npo_jacobian(inst.cls.v, inst.r, inst.alpha, inst.beta, inst.p))


def npo_q(inst: OrbitInstance) -> float:
    return float(_npo_q(inst.beta))


def _npo_instance(cls: OrbitClass, r: float, alpha: float, p: float, degeneracy: int, with_morse: bool) -> OrbitInstance:
    beta = beta_npo(cls.v, cls.w, alpha)
    inst = OrbitInstance(
        cls=cls,
        r=r,
        alpha=alpha,
        beta=beta,
        length=float(_npo_length(cls.v, r, alpha, beta)),
        jacobian=float(_npo_jacobian(cls.v, r, alpha, beta, p)),
        q_mismatch=float(_npo_q(beta)),
        p=p,
        degeneracy=degeneracy,
    )
    if with_morse:
        try:
            inst = replace(inst, morse=morse_index(inst))
        except CriticalStartError:
            pass
    return inst


@lru_cache(maxsize=4096)
def _scan(v: int, w: int):
    lo, hi = alpha_window(v, w)
    span = hi - lo
    a = np.linspace(lo + 1e-9 * span, hi - 1e-9 * span, SCAN_POINTS)
    return a, closure_radius(v, w, a)


def solve_alpha(v: int, w: int, r: float) -> list[float]:
    """All reflection angles of class (v, w) that close at radius r."""
    a, ra = _scan(v, w)
    f = ra - r
    idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0)[0]
    roots = []
    for i in idx:
        if not (np.isfinite(f[i]) and np.isfinite(f[i + 1])):
            continue
        if f[i] == 0.0:
            roots.append(float(a[i]))
            continue
        if f[i + 1] == 0.0:
            continue
        root = optimize.brentq(lambda t: closure_radius(v, w, t) - r, a[i], a[i + 1], xtol=ROOT_XTOL * min(1.0, r), rtol=1e-15)
        roots.append(root)
    # a double root shows up as a touching point without a sign change
    i_min = int(np.argmin(ra))
    if is_tangent_class(v, w) and 0 < i_min < len(a) - 1 and not roots:
        r_min, a_min = tangent_bifurcation_point(v, w)
        if abs(r - r_min) <= 1e-12 * R:
            roots.append(a_min)
    return sorted(roots)


def branch_of(v: int, w: int, alpha: float) -> str:
    if not is_tangent_class(v, w):
        return "plain"
    return "plain" if closure_slope(v, w, alpha) > 0 else "primed"


def solve_npo(v: int, w: int, r: float, p: float = 1.0, with_morse: bool = True) -> list[OrbitInstance]:
    """All real non-radial NPOs of class (v, w) through radius r."""
    if not (0 < r <= R):
        raise ValueError("r must lie in (0, R]")
    if not (v >= 2 and 1 <= w <= v // 2):
        raise ValueError(f"({v},{w}) is not a non-radial NPO class")
    out = []
    for alpha in solve_alpha(v, w, r):
        if alpha <= 0.0:
            continue
        cls = OrbitClass.npo(v, w, branch_of(v, w, alpha))
        out.append(_npo_instance(cls, r, alpha, p, 2, with_morse))
    return out


def npo_branch(v: int, w: int, r: float, p: float = 1.0, branch: str = "plain", with_morse: bool = False) -> OrbitInstance | None:
    """Single branch of an NPO class, or None if it does not exist at r.

    Classes (2k, k) and (2k+1, k) have r(alpha) monotonic on their window,
    so the root is bracketed directly instead of scanned.
    """
    if is_tangent_class(v, w):
        for inst in solve_npo(v, w, r, p, with_morse):
            if inst.cls.branch == branch:
                return inst
        return None
    lo, hi = alpha_window(v, w)
    r_lo = closure_radius(v, w, lo)
    if r <= r_lo:
        return None
    a = lo
    b = hi - 1e-12
    while closure_radius(v, w, b) < r:
        b = 0.5 * (b + hi)
    alpha = optimize.brentq(lambda t: closure_radius(v, w, t) - r, a, b, xtol=ROOT_XTOL * min(1.0, r), rtol=1e-15)
    return _npo_instance(OrbitClass.npo(v, w), r, alpha, p, 2, with_morse)


def npo_ghost(v: int, w: int, r: float, p: float = 1.0) -> OrbitInstance:
    """Real-valued continuation of the (2k+1, k) NPO below its birth radius.

    With alpha = i y the closure condition reads r = R sinh(y)/sinh(v y),
    and length, Jacobian and Q stay real.
    """
    if not is_radial_pitchfork_class(v, w):
        raise GhostUnavailable(f"({v},{w}) is born in a tangent bifurcation; its ghost is complex")
    r_b = R / v
    if not (0 < r < r_b):
        raise ValueError(f"ghost of ({v},{w}) only exists for 0 < r < R/{v}")

    def g(y):
        return R * math.sinh(y) / math.sinh(v * y) - r if y > 0 else R / v - r

    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
    y = optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15)
    chy, chvy = math.cosh(y), math.cosh(v * y)
    length = 2.0 * (v * R * chy - r * chvy)
    jac = 2.0 * r / p * (-chvy) * (1.0 - v * r * chvy / (R * chy))
    q = -math.cosh(2.0 * v * y)
    return OrbitInstance(
        cls=OrbitClass.npo(v, w),
        r=r,
        alpha=1j * y,
        beta=math.pi - 1j * v * y,
        length=length,
        jacobian=jac,
        q_mismatch=q,
        p=p,
        degeneracy=2,
        ghost=True,
    )


def npo_or_ghost(v: int, w: int, r: float, p: float = 1.0) -> OrbitInstance:
    """The (2k+1, k) NPO at r, continued as a ghost below R/v."""
    if r < R / v:
        return npo_ghost(v, w, r, p)
    if r == R / v:
        # the bifurcation point itself: orbit coincides with the radial L+ orbit
        return replace(radial_orbit((v - 1) // 2, "+", r, p, with_morse=False), cls=OrbitClass.npo(v, w), degeneracy=2)
    inst = npo_branch(v, w, r, p)
    if inst is None:
        raise RuntimeError(f"NPO ({v},{w}) not found at r={r}")
    return inst


# ------------------------------------------------------------- radial / PO

def radial_orbit(k: int, sign: str, r: float, p: float = 1.0, with_morse: bool = True) -> OrbitInstance:
    """Radial orbit L+(k) (outward start) or L-(k) (inward start)."""
    if not (0 < r <= R):
        raise ValueError("r must lie in (0, R]")
    cls = OrbitClass.radial(k, sign)
    v = 2 * k + 1
    if sign == "+":
        length = 2.0 * (v * R - r)
        jac = 2.0 / (R * p) * r * (v * r - R)
        beta = math.pi
        mu = 6 * k + 2 if r < R / v else 6 * k + 1
    else:
        length = 2.0 * (v * R + r)
        jac = 2.0 / (R * p) * r * (v * r + R)
        beta = 0.0
        mu = 6 * k + 3
    inst = OrbitInstance(cls=cls, r=r, alpha=0.0, beta=beta, length=length, jacobian=jac,
                         q_mismatch=-1.0, p=p, degeneracy=1)
    if with_morse:
        try:
            mu = morse_index(inst)
        except CriticalStartError:
            pass
        inst = replace(inst, morse=mu)
    return inst


def po_properties(v: int, w: int, r: float, p: float = 1.0, with_morse: bool = True) -> OrbitInstance:
    """Periodic orbit (v, w) through radius r.

    Below the caustic R cos(w pi/v) the PO does not pass through r; the
    returned instance is then its real continuation, flagged as ghost.
    """
    if not (0 <= r <= R):
        raise ValueError("r must lie in [0, R]")
    cls = OrbitClass.po(v, w)
    phi = po_half_angle(v, w)
    alpha = math.pi / 2 - phi
    length = 2.0 * v * R * math.sin(phi)
    jac = -2.0 * v / (R * p) * (r * r - (R * math.cos(phi)) ** 2) / math.sin(phi)
    ghost = r < po_caustic(v, w) - 1e-15
    if ghost or r == 0:
        beta = float("nan")
    else:
        beta = math.asin(min(1.0, R * math.sin(alpha) / r))
    deg = 2 if is_diameter_class(v, w) else 4
    inst = OrbitInstance(cls=cls, r=r, alpha=alpha, beta=beta, length=length, jacobian=jac,
                         q_mismatch=1.0, p=p, degeneracy=deg, ghost=ghost)
    if with_morse and not ghost:
        try:
            inst = replace(inst, morse=morse_index(inst))
        except CriticalStartError:
            pass
    return inst


# -------------------------------------------------------------- bifurcations

@lru_cache(maxsize=256)
def tangent_bifurcation_point(v: int, w: int) -> tuple[float, float] | None:
    """(r_min, alpha_0): minimum of r(alpha) for a tangent-pair class."""
    if not is_tangent_class(v, w):
        return None
    lo, hi = alpha_window(v, w)
    a = np.linspace(lo, hi, 2001)[1:-1]
    s = closure_slope(v, w, a)
    idx = np.nonzero(np.sign(s[:-1]) != np.sign(s[1:]))[0]
    if len(idx) != 1:
        raise RuntimeError(f"expected a single minimum of r(alpha) for ({v},{w}), found {len(idx)}")
    i = idx[0]
    a0 = optimize.brentq(lambda t: closure_slope(v, w, t), a[i], a[i + 1], xtol=1e-15, rtol=1e-15)
    return closure_radius(v, w, a0), a0


def tangent_bifurcation_radius(v: int, w: int) -> float | None:
    pt = tangent_bifurcation_point(v, w)
    return None if pt is None else pt[0]


def bifurcation_events(v: int, w: int) -> list[BifurcationEvent]:
    """Critical radii at which orbits of class (v, w) appear or change."""
    if not (v >= 2 and 1 <= w <= v // 2):
        raise ValueError(f"({v},{w}) is not a non-radial class")
    npo = OrbitClass.npo(v, w)
    po = OrbitClass.po(v, w)
    out = []
    if is_diameter_class(v, w):
        out.append(BifurcationEvent(0.0, BifurcationType.SYMMETRY_BREAKING, po, (npo,)))
    elif is_radial_pitchfork_class(v, w):
        out.append(BifurcationEvent(R / v, BifurcationType.PITCHFORK, OrbitClass.radial(w, "+"), (npo,)))
        out.append(BifurcationEvent(po_caustic(v, w), BifurcationType.PITCHFORK, npo, (po,)))
    else:
        out.append(BifurcationEvent(tangent_bifurcation_radius(v, w), BifurcationType.TANGENT, None,
                                    (npo, OrbitClass.npo(v, w, "primed"))))
        out.append(BifurcationEvent(po_caustic(v, w), BifurcationType.PITCHFORK, npo, (po,)))
    return sorted(out, key=lambda e: e.radius)


# ------------------------------------------------------------ Morse indices

def _focus_distance(d: float, P: float) -> float:
    """Mirror equation 1/d + 1/s = 2/P of a circular wall at fixed alpha."""
    if math.isinf(d):
        return P / 2
    denom = 2.0 * d - P
    if denom == 0.0:
        return math.inf
    return P * d / denom


def count_conjugate_points(P: float, s0: float, v: int, s_last: float, tol: float = CRITICAL_TOL) -> int:
    """Conjugate points along an orbit with v reflections.

    The orbit runs s0 to the first wall, 2P between walls and s_last
    from the last wall back to the start.  A fan of rays from the start
    refocuses after every reflection; each real focus inside a segment is
    a conjugate point.  A focus that lands on a wall is counted once, as
    the end of the segment that reaches that wall, so the index stays
    constant between critical radii.
    """
    count = 0
    d = s0
    for i in range(1, v + 1):
        seg = 2.0 * P if i < v else s_last
        s = _focus_distance(d, P)
        if i == v:
            if abs(s - seg) <= tol * R:
                raise CriticalStartError("start point is conjugate to itself")
            if tol * R < s < seg:
                count += 1
        elif tol * R < s <= seg + tol * R:
            count += 1
        d = 2.0 * P - s if math.isfinite(s) else -math.inf
    return count


def morse_index(inst: OrbitInstance) -> int:
    """Morse index = conjugate points + 2 v."""
    if inst.ghost:
        raise CriticalStartError("ghost orbits have no Morse index")
    r = inst.r
    v = inst.cls.v
    if r >= R - CRITICAL_TOL * R:
        raise CriticalStartError("start point lies on the wall")
    if r <= CRITICAL_TOL * R:
        raise CriticalStartError("start point is the centre (caustic of every family)")
    P = R * math.cos(float(np.real(inst.alpha)))
    s0 = P + r * math.cos(float(np.real(inst.beta)))
    if abs(s0 - P) <= CRITICAL_TOL * R:
        raise CriticalStartError("start point lies on a caustic")
    s_last = 2.0 * P - s0 if inst.cls.kind is Kind.PO else s0
    return count_conjugate_points(P, s0, v, s_last) + 2 * v


# --------------------------------------------------------------- enumeration

def enumerate_orbits(r: float, l_max: float, p: float = 1.0, v_max: int = 40) -> list[OrbitInstance]:
    """All radial orbits, non-radial NPOs and POs through r with L <= l_max."""
    if not (0 < r < R):
        raise ValueError("r must lie in (0, R)")
    if l_max <= 0:
        raise ValueError("l_max must be positive")
    out: list[OrbitInstance] = []
    k = 0
    while 2 * ((2 * k + 1) * R - r) <= l_max:
        for sign in "+-":
            inst = radial_orbit(k, sign, r, p)
            if inst.length <= l_max:
                out.append(inst)
        k += 1
    for v in range(2, v_max + 1):
        for w in range(1, v // 2 + 1):
            # shortest member of the class still wraps around the centre
            for inst in solve_npo(v, w, r, p):
                if inst.length <= l_max:
                    out.append(inst)
            if r >= po_caustic(v, w):
                po = po_properties(v, w, r, p)
                if po.length <= l_max:
                    out.append(po)
    return out


# ------------------------------------------------------------------ oracles

CLOSED_FORM_CLASSES = ("2,1", "3,1", "4,1", "4,1'", "5,1", "5,1'")


def oracle_closed_form(name: str, r: float, p: float = 1.0) -> OrbitInstance:
    """Closed-form orbit properties for the shortest non-radial classes.

    These formulas are independent of the scan-and-bisect solver and
    serve as its oracle.  (3,1) below R/3 returns the real ghost
    continuation.
    """
    if name not in CLOSED_FORM_CLASSES:
        raise ValueError(f"no closed form for class {name!r}")
    if not (0 < r <= R):
        raise ValueError("r must lie in (0, R]")
    primed = name.endswith("'")
    v, w = (int(t) for t in name.rstrip("'").split(","))
    cls = OrbitClass.npo(v, w, "primed" if primed else "plain")
    if name == "2,1":
        x = (math.sqrt(R * R + 8 * r * r) - R) / (4 * r)
        alpha = math.asin(x)
        length = 4 * R * (1 - x * x) ** 1.5 / (1 - 2 * x * x)
        jac = R / p * math.tan(2 * alpha) * (x + r / R * (1 + 6 * x * x))
        q = 1 - 8 * x * x + 8 * x**4
        return OrbitInstance(cls, r, alpha, beta_npo(v, w, alpha), length, jac, q, p, 2)
    if name == "3,1":
        length = 2 * math.sqrt((R + r) / r) * (R + r)
        q = R * R / (2 * r**3) * (3 * r - R) - 1
        jac = 2 / (R * p) * (2 * r - R) * (3 * r - R) * math.sqrt((r + R) / r)
        ghost = r < R / 3
        alpha = float("nan") if ghost else math.asin(0.5 * math.sqrt(3 - R / r))
        beta = float("nan") if ghost else beta_npo(v, w, alpha)
        return OrbitInstance(cls, r, alpha, beta, length, jac, q, p, 2, ghost=ghost)
    if name.startswith("5,1"):
        disc = 5 - 4 * R / r
        if disc < 0:
            raise ValueError("(5,1) pair only exists for r >= 4R/5")
        sq = math.sqrt(disc)
        sgn = -1.0 if primed else 1.0
        x = 0.5 * math.sqrt(0.5 * (5 + sgn * sq))
        alpha = math.asin(x)
        root = math.sqrt(0.5 * (3 - sgn * sq))
        length = R * root * (4 + r / R + sgn * r / R * sq)
        # the sign here follows the geometry, Q = -cos(2 beta); at r = R the plain orbit has beta = pi/3
        q = -1 + R * R / (4 * r * r) * (5 + sgn * sq)
        jac = root / (R * p) * (4 * R * R + 30 * r * r - 29 * R * r + sgn * r * (-9 * R + 10 * r) * sq)
        return OrbitInstance(cls, r, alpha, beta_npo(v, w, alpha), length, jac, q, p, 2)
    # (4,1): real roots of 8 r x^4 - 8 r x^2 + R x + r = 0 on the physical window
    r41, a0 = tangent_bifurcation_point(4, 1)
    if r < r41:
        raise ValueError("(4,1) pair only exists for r >= r_{4,1}")
    roots = np.roots([8 * r, 0.0, -8 * r, R, r])
    x0 = math.sin(a0)
    xs = sorted(float(z.real) for z in roots if abs(z.imag) < 1e-7 and 0.5 - 1e-12 <= z.real <= math.sin(3 * math.pi / 10) + 1e-12)
    xs = [x for x in xs if (x < x0) == primed] or xs[:1]
    x = min(xs, key=lambda t: abs(t - x0)) if len(xs) > 1 else xs[0]
    # polish the quartic root
    x = optimize.newton(lambda t: 8 * r * t**4 - 8 * r * t**2 + R * t + r, x, fprime=lambda t: 32 * r * t**3 - 16 * r * t + R, tol=1e-15, maxiter=50)
    alpha = math.asin(x)
    beta = beta_npo(4, 1, alpha)
    sa, cb = x, math.cos(beta)
    cot_b = cb / math.sin(beta)
    length = 2 * (4 * R * math.sqrt(1 - x * x) + R * sa / math.sin(beta) * cb)
    jac = R / p * (sa * cot_b + r / R * cb * (1 + 8 * math.tan(alpha) * cot_b))
    q = -math.cos(2 * beta)
    return OrbitInstance(cls, r, alpha, beta, length, jac, q, p, 2)


# ------------------------------------------------------- vectorised solvers

@lru_cache(maxsize=64)
def _monotonic_table(v: int, w: int):
    lo, hi = alpha_window(v, w)
    a = np.linspace(lo, hi, 20_001)[:-1]
    return a, closure_radius(v, w, a)


def alpha_monotonic(v: int, w: int, r) -> np.ndarray:
    """Reflection angle of the (2k, k) or (2k+1, k) NPO for an array of radii.

    Returns NaN where the orbit is not real.  Table interpolation followed
    by Newton steps on r(alpha).
    """
    if is_tangent_class(v, w):
        raise ValueError(f"({v},{w}) is not monotonic in alpha")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    a_tab, r_tab = _monotonic_table(v, w)
    lo, hi = alpha_window(v, w)
    ok = (r > r_tab[0]) & (r <= R)
    a = np.full(r.shape, np.nan)
    if not ok.any():
        return a
    x = np.interp(r[ok], r_tab, a_tab)
    target = r[ok]
    # converged entries are frozen so each result is independent of its neighbours
    live = np.ones(x.shape, dtype=bool)
    for _ in range(30):
        xl = x[live]
        step = (closure_radius(v, w, xl) - target[live]) / closure_slope(v, w, xl)
        x[live] = np.clip(xl - step, lo, hi - 1e-15)
        live[live] = np.abs(step) > 1e-15 * np.maximum(np.abs(xl), 1e-300)
        if not live.any():
            break
    a[ok] = x
    return a


@lru_cache(maxsize=16)
def _ghost_table(v: int):
    y = np.linspace(1e-6, 60.0 / v, 20_001)
    return y, np.log(np.sinh(y) / np.sinh(v * y))


def ghost_parameter(v: int, r) -> np.ndarray:
    """y > 0 with R sinh(y)/sinh(v y) = r, for 0 < r < R/v (NaN elsewhere)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    y_tab, g_tab = _ghost_table(v)
    ok = (r > 0) & (r < R / v)
    y = np.full(r.shape, np.nan)
    if not ok.any():
        return y
    target = np.log(r[ok] / R)
    x = np.interp(-target, -g_tab, y_tab)
    live = np.ones(x.shape, dtype=bool)
    for _ in range(50):
        xl = x[live]
        h = np.log(np.sinh(xl) / np.sinh(v * xl)) - target[live]
        dh = 1.0 / np.tanh(xl) - v / np.tanh(v * xl)
        step = h / dh
        x[live] = np.maximum(xl - step, 0.5 * xl)
        live[live] = np.abs(step) > 1e-15 * xl
        if not live.any():
            break
    y[ok] = x
    return y


@dataclass(frozen=True)
class OrbitArrays:
    """Length, Jacobian and Q of one orbit family sampled on a radius grid."""

    r: np.ndarray
    length: np.ndarray
    jacobian: np.ndarray
    q_mismatch: np.ndarray
    degeneracy: int
    alpha: np.ndarray | None = None


def npo_arrays(v: int, w: int, r, p: float, continue_ghost: bool = False) -> OrbitArrays:
    """Monotonic NPO class on a grid; (2k+1, k) optionally continued as ghost."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    a = alpha_monotonic(v, w, r)
    b = beta_npo(v, w, a)
    length = _npo_length(v, r, a, b)
    jac = _npo_jacobian(v, r, a, b, p)
    q = _npo_q(b)
    if continue_ghost and is_radial_pitchfork_class(v, w):
        g = r < R / v
        y = ghost_parameter(v, r[g])
        chy, chvy = np.cosh(y), np.cosh(v * y)
        rg = r[g]
        length[g] = 2.0 * (v * R * chy - rg * chvy)
        jac[g] = 2.0 * rg / p * (-chvy) * (1.0 - v * rg * chvy / (R * chy))
        q[g] = -np.cosh(2.0 * v * y)
        at = r == R / v
        length[at] = 2.0 * (v * R - r[at])
        jac[at] = 0.0
        q[at] = -1.0
    return OrbitArrays(r, length, jac, q, 2, a)


def radial_arrays(k: int, sign: str, r, p: float) -> OrbitArrays:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    v = 2 * k + 1
    s = 1.0 if sign == "+" else -1.0
    length = 2.0 * (v * R - s * r)
    jac = 2.0 / (R * p) * r * (v * r - s * R)
    return OrbitArrays(r, length, jac, -np.ones_like(r), 1)


def po_arrays(v: int, w: int, r, p: float) -> OrbitArrays:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi = po_half_angle(v, w)
    length = np.full(r.shape, 2.0 * v * R * math.sin(phi))
    jac = -2.0 * v / (R * p) * (r * r - (R * math.cos(phi)) ** 2) / math.sin(phi)
    return OrbitArrays(r, length, jac, np.ones_like(r), 2 if is_diameter_class(v, w) else 4)


def radial_morse(k: int, sign: str, r: float) -> int:
    """Closed-form Morse index of the radial orbits."""
    if sign == "-":
        return 6 * k + 3
    return 6 * k + 2 if r < R / (2 * k + 1) else 6 * k + 1
