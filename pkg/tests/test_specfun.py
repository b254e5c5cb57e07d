import threading

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circdens import specfun
from circdens.specfun import BesselDomainError, bessel_j, bessel_order, bessel_zero, gamma_quarter

ORDERS = [0, 1, 2, 7, 0.25, -0.25, 0.75, -0.75]


@pytest.mark.parametrize("nu", ORDERS)
@pytest.mark.parametrize("x", [1e-3, 0.5, 3.7, 25.0, 180.0])
def test_bessel_matches_mpmath(nu, x):
    expected = float(mpmath.besselj(mpmath.mpf(nu), x))
    assert bessel_j(nu, x) == pytest.approx(expected, rel=1e-11, abs=1e-14)


@given(st.floats(min_value=1e-6, max_value=300.0), st.sampled_from(ORDERS))
@settings(max_examples=60, deadline=None)
def test_bessel_property_mpmath(x, nu):
    expected = float(mpmath.besselj(mpmath.mpf(nu), x))
    assert abs(bessel_j(nu, x) - expected) <= 1e-11 * max(1.0, abs(expected))


def test_bessel_vectorised():
    x = np.linspace(0.1, 10, 7)
    out = bessel_j(1, x)
    assert out.shape == x.shape
    assert out[3] == bessel_j(1, float(x[3]))


def test_bessel_at_zero():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0
    assert bessel_j(0.25, 0.0) == 0.0


@pytest.mark.parametrize("nu", [-0.25, -0.75])
def test_negative_order_diverges_at_zero(nu):
    with pytest.raises(BesselDomainError):
        bessel_j(nu, 0.0)


@pytest.mark.parametrize("nu", [0.5, -1, 1.3, 1 / 3, "a"])
def test_unsupported_orders(nu):
    with pytest.raises(BesselDomainError):
        bessel_order(nu)


def test_negative_argument():
    with pytest.raises(BesselDomainError):
        bessel_j(0, -1.0)


@pytest.mark.parametrize("l,n", [(0, 0), (0, 1), (1, 0), (3, 4), (12, 0), (40, 7)])
def test_zeros_match_mpmath(l, n):
    expected = float(mpmath.besseljzero(l, n + 1))
    assert bessel_zero(l, n) == pytest.approx(expected, abs=1e-12)


def test_first_zero():
    assert abs(bessel_zero(0, 0) - 2.404825557695773) < 1e-13


def test_zeros_interlace():
    # zeros of J_l and J_{l+1} interlace
    for l in range(5):
        a = [bessel_zero(l, n) for n in range(6)]
        b = [bessel_zero(l + 1, n) for n in range(6)]
        assert all(a[i] < b[i] < a[i + 1] for i in range(5))


def test_zero_index_errors():
    with pytest.raises(BesselDomainError):
        bessel_zero(-1, 0)
    with pytest.raises(BesselDomainError):
        bessel_zero(0, -1)


def test_zero_cache_threadsafe():
    specfun.clear_zero_cache()
    results = {}

    def worker(i):
        results[i] = [bessel_zero(5, n) for n in range(20)]

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    first = results[0]
    assert all(r == first for r in results.values())


def test_gamma_quarter():
    assert gamma_quarter() == pytest.approx(float(mpmath.gamma(0.25)), rel=1e-15)
