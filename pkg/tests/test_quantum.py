import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, optimize

from circdens import quantum as qm


def test_lowest_levels():
    spec = qm.build_spectrum(100.0)
    first = spec.levels[:4]
    assert [(lev.l, lev.n) for lev in first] == [(0, 0), (1, 0), (2, 0), (0, 1)]
    assert first[0].energy == pytest.approx(float(mpmath.besseljzero(0, 1)) ** 2, rel=1e-14)
    assert [lev.degeneracy for lev in first] == [2, 4, 4, 2]


def test_spectrum_sorted_and_bounded():
    spec = qm.build_spectrum(400.0)
    e = spec.energies
    assert np.all(np.diff(e) >= 0)
    assert e.max() <= 400.0


def test_fermi_energy_closed_shells():
    lam, filled = qm.fermi_energy(6)
    assert len(filled) == 2
    assert lam == pytest.approx(float(mpmath.besseljzero(1, 1)) ** 2, rel=1e-13)
    assert qm.is_closed(2) and qm.is_closed(68) and qm.is_closed(606)


def test_open_shell_reports_neighbours():
    with pytest.raises(qm.OpenShellError) as info:
        qm.fermi_energy(8)
    assert (info.value.lower, info.value.upper) == (6, 10)


@pytest.mark.parametrize("N", [3, 0, -2])
def test_invalid_particle_numbers(N):
    with pytest.raises(ValueError):
        qm.fermi_energy(N)


def test_valid_particle_numbers():
    # oracle: levels from mpmath zeros, filled in order of energy
    levels = sorted(
        (float(mpmath.besseljzero(l, n + 1)), 2 if l == 0 else 4) for l in range(8) for n in range(4)
    )
    cum = np.cumsum([g for _, g in levels])
    expected = [int(c) for c in cum if c <= 60]
    assert qm.valid_particle_numbers(60) == expected


def test_smooth_fermi_energy_solves_weyl():
    # independent oracle: bracketed root of the Weyl counting function
    for N in (10, 68, 606, 2000):
        root = optimize.brentq(lambda e: qm.counting_weyl(e) - N, 4.0, 1e5, xtol=1e-13)
        assert qm.smooth_fermi_energy(N) == pytest.approx(root, rel=1e-12)


@pytest.mark.parametrize("N", [6, 68, 606])
def test_normalisation(N):
    val, _ = integrate.quad(lambda r: 2 * math.pi * r * qm.density_rho(r, N), 0, 1, limit=400, epsabs=1e-9)
    assert val == pytest.approx(N, rel=1e-7)


def test_dirichlet_boundary():
    d = qm.densities(np.array([1.0]), 68)
    assert abs(d["rho"][0]) < 1e-20
    assert abs(d["tau"][0]) < 1e-18


def test_ground_state_density():
    # one level, l = 0: rho = 2 J0(z r)^2 / (pi J1(z)^2)
    z = float(mpmath.besseljzero(0, 1))
    for r in (0.0, 0.3, 0.8):
        expected = 2 * float(mpmath.besselj(0, z * r)) ** 2 / (math.pi * float(mpmath.besselj(1, z)) ** 2)
        assert qm.density_rho(r, 2) == pytest.approx(expected, rel=1e-12)


def test_kinetic_identity_against_finite_differences():
    # tau1 - tau = (1/2) lap rho, with the Laplacian from finite differences
    N = 68
    r = np.linspace(0.05, 0.95, 19)
    h = 1e-4
    rho = lambda x: qm.densities(x, N)["rho"]
    d2 = (rho(r + h) - 2 * rho(r) + rho(r - h)) / h**2
    d1 = (rho(r + h) - rho(r - h)) / (2 * h)
    lap_fd = d2 + d1 / r
    d = qm.densities(r, N)
    assert np.allclose(d["tau1"] - d["tau"], 0.5 * lap_fd, rtol=1e-5, atol=1e-3 * np.max(np.abs(lap_fd)))
    assert np.allclose(qm.laplacian_rho(r, N), lap_fd, rtol=1e-5, atol=1e-3 * np.max(np.abs(lap_fd)))


def test_xi_is_mean_of_tau_and_tau1():
    d = qm.densities(np.linspace(0, 1, 11), 68)
    assert np.allclose(d["xi"], 0.5 * (d["tau"] + d["tau1"]))


def test_tau1_centre_includes_l1():
    # at r = 0 only l = 0 and l = 1 survive in tau1; l = 1 enters through (l/x) J_l
    _, filled = qm.fermi_energy(6)
    z0, z1 = filled[0].z, filled[1].z
    c0 = 1 / (math.pi * float(mpmath.besselj(1, z0)) ** 2)
    c1 = 1 / (math.pi * float(mpmath.besselj(2, z1)) ** 2)
    # l = 0: J0'(0) = 0; l = 1: J1'(0)^2 + (J1(x)/x)^2 -> 1/4 + 1/4
    expected = 4 * c1 * z1**2 * 0.5
    assert qm.density_tau1(0.0, 6) == pytest.approx(expected, rel=1e-12)
    assert expected > 0 and c0 > 0


def test_tf_densities():
    rho_tf, tau_tf = qm.tf_densities(606)
    lam = qm.smooth_fermi_energy(606)
    assert tau_tf / rho_tf == pytest.approx(lam / 2)
    assert rho_tf * math.pi != pytest.approx(606, rel=1e-3)


def test_interior_oscillates_about_tf():
    r = np.linspace(0.1, 0.8, 400)
    osc = qm.oscillating_densities(r, 606)["delta_rho"]
    rho_tf, _ = qm.tf_densities(606)
    assert abs(osc.mean()) < 0.05 * rho_tf


def test_counting_functions():
    assert qm.counting_exact(5.0) == 0
    assert qm.counting_exact(6.0) == 2
    E = np.array([10.0, 50.0, 300.0])
    assert list(qm.counting_exact_array(E)) == [qm.counting_exact(e) for e in E]
    assert qm.counting_weyl(1.0) == pytest.approx(0.5 - 1 + 1 / 3)


def test_shell_correction_exact_small():
    lam = qm.smooth_fermi_energy(2)
    expected = 2 * float(mpmath.besseljzero(0, 1)) ** 2 - (lam**2 / 4 - lam**1.5 / 3)
    assert qm.shell_correction_exact(2) == pytest.approx(expected, rel=1e-13)


def test_profile_validation():
    prof = qm.profile(np.linspace(0, 1, 5), 6, "delta_rho")
    assert prof.values.shape == (5,)
    with pytest.raises(ValueError):
        qm.DensityProfile(grid=np.array([0.5, 0.2]), values=np.zeros(2), channel="rho", N=6)
    with pytest.raises(ValueError):
        qm.profile(np.linspace(0, 1, 5), 6, "bogus")
