"""Bessel functions, their zeros and Gamma(1/4).

Only the orders that the density formulas actually use are accepted:
non-negative integers and the quarter orders +-1/4, +-3/4.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

import numpy as np
from scipy import optimize, special

QUARTER_ORDERS = (Fraction(1, 4), Fraction(-1, 4), Fraction(3, 4), Fraction(-3, 4))

_ZERO_XTOL = 1e-13
_SCAN_STEP = math.pi / 4


class BesselDomainError(ValueError):
    """Raised for orders or arguments outside the supported domain."""


def bessel_order(nu) -> Fraction:
    """Validate ``nu`` and return it as an exact fraction."""
    try:
        order = Fraction(nu).limit_denominator(8)
    except (TypeError, ValueError) as exc:
        raise BesselDomainError(f"unsupported Bessel order {nu!r}") from exc
    if abs(float(order) - float(nu)) > 1e-14:
        raise BesselDomainError(f"unsupported Bessel order {nu!r}")
    if order.denominator == 1 and order >= 0:
        return order
    if order in QUARTER_ORDERS:
        return order
    raise BesselDomainError(f"unsupported Bessel order {nu!r}")


def bessel_j(nu, x):
    """Cylindrical Bessel function J_nu(x) for x >= 0.

    Scalars in, scalar out; arrays are evaluated elementwise.
    """
    order = bessel_order(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise BesselDomainError("bessel_j requires x >= 0")
    if order < 0 and np.any(xa == 0):
        raise BesselDomainError(f"J_{order}(x) diverges at x = 0")
    if order.denominator == 1:
        val = special.jv(int(order), xa)
    else:
        val = special.jv(float(order), xa)
    if np.ndim(val) == 0:
        return float(val)
    return val


class _ZeroTable:
    """Per-order list of positive zeros, grown on demand."""

    def __init__(self):
        self._zeros: dict[int, list[float]] = {}
        self._lock = threading.Lock()

    def get(self, l: int, n: int) -> float:
        with self._lock:
            zeros = self._zeros.setdefault(l, [])
            while len(zeros) <= n:
                zeros.append(self._next_zero(l, zeros[-1] if zeros else None))
            return zeros[n]

    def clear(self):
        with self._lock:
            self._zeros.clear()

    @staticmethod
    def _next_zero(l: int, previous: float | None) -> float:
        # no zero of J_l lies below l, and consecutive zeros are ~pi apart
        a = float(l) if previous is None else previous + 1e-3
        if a == 0.0:
            a = 1e-3
        fa = special.jv(l, a)
        while True:
            b = a + _SCAN_STEP
            fb = special.jv(l, b)
            if fa == 0.0:
                return a
            if fa * fb < 0:
                return optimize.brentq(lambda t: special.jv(l, t), a, b, xtol=_ZERO_XTOL, rtol=1e-15, maxiter=200)
            a, fa = b, fb


_TABLE = _ZeroTable()


def bessel_zero(l: int, n: int) -> float:
    """The (n+1)-th positive zero z_{nl} of J_l; n = 0 is the first zero."""
    if l < 0 or n < 0 or int(l) != l or int(n) != n:
        raise BesselDomainError(f"bessel_zero needs integers l, n >= 0, got ({l}, {n})")
    return _TABLE.get(int(l), int(n))


def clear_zero_cache():
    _TABLE.clear()


def gamma_quarter() -> float:
    """Gamma(1/4)."""
    return math.gamma(0.25)
