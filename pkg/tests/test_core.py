"""Couplings, unit conversions, and species parameters."""

import math

import numpy as np
import pytest
from scipy import constants

from coopdipole.core import (
    GAMMA,
    K,
    LAMBDA,
    SpeciesParams,
    UnitSystem,
    coupling_asymptotics,
    coupling_from_detuning,
    linewidth_from_dipole_SI,
)
from coopdipole.errors import ConfigError


def test_natural_constants():
    assert LAMBDA == 1.0
    assert GAMMA == 1.0
    assert K == 2.0 * math.pi


def test_coupling_on_resonance():
    # -3*(1/2)/(i/2) collapses to a purely imaginary 3i
    g = coupling_from_detuning(0.0, 1.0)
    assert g == 3.0j


def test_coupling_at_half_linewidth():
    g = coupling_from_detuning(0.5, 1.0)
    assert abs(g - (-1.5 + 1.5j)) < 1e-15


def test_coupling_symmetric_detuning_pair():
    # Opposite detunings share the imaginary part and flip the real part.
    g_plus = coupling_from_detuning(0.5, 1.0)
    g_minus = coupling_from_detuning(-0.5, 1.0)
    assert g_plus.imag == g_minus.imag
    assert g_plus.real == -g_minus.real


def test_coupling_parity_and_passivity_scan():
    rng = np.random.default_rng(7)
    for _ in range(200):
        delta = float(rng.uniform(-100.0, 100.0))
        gamma_s = float(rng.uniform(0.1, 5.0))
        g = coupling_from_detuning(delta, gamma_s)
        assert g.imag >= 0.0
        assert abs(g) <= 3.0 * LAMBDA + 1e-12
        # coupling(delta) = -conj(coupling(-delta)), exactly
        mirrored = coupling_from_detuning(-delta, gamma_s)
        assert g == -np.conj(mirrored)


def test_coupling_vanishes_far_off_resonance():
    g = coupling_from_detuning(1e12, 1.0)
    assert abs(g) < 1e-11


def test_coupling_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        coupling_from_detuning(float("nan"), 1.0)
    with pytest.raises(ConfigError):
        coupling_from_detuning(float("inf"), 1.0)
    with pytest.raises(ConfigError):
        coupling_from_detuning(0.0, 0.0)
    with pytest.raises(ConfigError):
        coupling_from_detuning(0.0, -1.0)


def test_asymptotics_against_exact():
    # The far-detuned expansion should approach the exact coupling.
    for delta, budget in ((100.0, 1e-3), (10.0, 1e-1)):
        exact = coupling_from_detuning(delta, 1.0)
        re_approx, im_approx = coupling_asymptotics(delta, 1.0)
        err = abs(exact - (re_approx + 1j * im_approx)) / abs(exact)
        print(f"delta={delta}: asymptotic relative error {err:.2e}")
        assert err < budget


def test_asymptotics_limit_and_singularity():
    re_approx, im_approx = coupling_asymptotics(1e15, 1.0)
    assert abs(re_approx) < 1e-12 and abs(im_approx) < 1e-12
    with pytest.raises(ConfigError):
        coupling_asymptotics(0.0, 1.0)


def test_species_params():
    sp = SpeciesParams("A", 0.5, 1.0)
    assert sp.coupling == coupling_from_detuning(0.5, 1.0)
    assert sp.coupling.imag >= 0.0
    with pytest.raises(ConfigError):
        SpeciesParams("C", 0.0, 1.0)
    with pytest.raises(ConfigError):
        SpeciesParams("A", 0.0, 0.0)
    with pytest.raises(ConfigError):
        SpeciesParams("A", float("nan"), 1.0)


def test_unit_round_trip():
    units = UnitSystem(wavelength_m=759e-9, linewidth_hz=5.93e6)
    rng = np.random.default_rng(11)
    for _ in range(50):
        length = float(rng.uniform(0.01, 100.0))
        rate = float(rng.uniform(0.01, 100.0))
        back_l = units.length_from_si(units.length_to_si(length))
        back_r = units.rate_from_si(units.rate_to_si(rate))
        assert abs(back_l - length) / length < 1e-12
        assert abs(back_r - rate) / rate < 1e-12


def test_unit_system_requires_scales():
    with pytest.raises(ConfigError):
        UnitSystem().length_to_si(1.0)
    with pytest.raises(ConfigError):
        UnitSystem().rate_to_si(1.0)


def test_linewidth_magnitude_and_isotope_splitting():
    # Ytterbium-like transition at 215.869 THz; the frozen dipole moment
    # is sized so the cyclic decay rate lands at 5.93 MHz.
    freq_hz = 215869124.9e6
    omega = 2.0 * math.pi * freq_hz
    d = 5.950325802241774e-29
    gamma = linewidth_from_dipole_SI(d, omega)
    gamma_hz = gamma / (2.0 * math.pi)
    print(f"gamma = {gamma_hz / 1e6:.3f} MHz (cyclic)")
    assert abs(gamma_hz - 5.93e6) / 5.93e6 < 1e-3

    # 27.0 MHz isotope splitting expressed in these linewidths
    splitting_hz = (215869151.9 - 215869124.9) * 1e6
    ratio = splitting_hz / gamma_hz
    print(f"isotope splitting = {ratio:.2f} linewidths")
    assert abs(ratio - 4.55) < 0.05


def test_linewidth_quadratic_in_dipole():
    omega = 2.0 * math.pi * 2e14
    g1 = linewidth_from_dipole_SI(1e-30, omega)
    g2 = linewidth_from_dipole_SI(2e-30, omega)
    assert abs(g2 / g1 - 4.0) < 1e-12


def test_linewidth_inverts_for_dipole():
    # Solving the formula back for d reproduces the input to 1e-10.
    omega = 2.0 * math.pi * 215869124.9e6
    d_in = 3.3e-30
    gamma = linewidth_from_dipole_SI(d_in, omega)
    d_back = math.sqrt(
        gamma * 3.0 * math.pi * constants.epsilon_0 * constants.hbar
        * constants.c**3 / omega**3
    )
    assert abs(d_back - d_in) / d_in < 1e-10


def test_linewidth_rejects_nonpositive():
    with pytest.raises(ConfigError):
        linewidth_from_dipole_SI(0.0, 1.0)
    with pytest.raises(ConfigError):
        linewidth_from_dipole_SI(1e-30, -1.0)
