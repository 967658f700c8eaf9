"""Unit conventions, species parameters, and complex coupling strengths.

Natural units are used throughout the package: lengths in wavelengths
(lambda = 1, so k = 2*pi), rates in linewidths (gamma = 1), eps0 = 1, and
unit incident peak amplitude.  SI quantities appear only at the reporting
boundary via :class:`UnitSystem` and :func:`linewidth_from_dipole_SI`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as _const

from .errors import ConfigError

#: Wavelength in natural units.
LAMBDA = 1.0
#: Wavenumber 2*pi/lambda in natural units.
K = 2.0 * math.pi
#: Single-atom linewidth in natural units.
GAMMA = 1.0
#: Vacuum permittivity in natural units.
EPS0 = 1.0
#: Incident peak amplitude in natural units.
E0 = 1.0


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class UnitSystem:
    """Natural-unit convention marker with optional SI scale factors.

    ``wavelength_m`` and ``linewidth_hz`` are used only when converting
    results for reports; all computation stays in natural units.
    """

    wavelength_m: float | None = None
    linewidth_hz: float | None = None

    def length_to_si(self, length: float) -> float:
        if self.wavelength_m is None:
            raise ConfigError("wavelength_m not set on UnitSystem")
        return length * self.wavelength_m

    def length_from_si(self, meters: float) -> float:
        if self.wavelength_m is None:
            raise ConfigError("wavelength_m not set on UnitSystem")
        return meters / self.wavelength_m

    def rate_to_si(self, rate: float) -> float:
        if self.linewidth_hz is None:
            raise ConfigError("linewidth_hz not set on UnitSystem")
        return rate * self.linewidth_hz

    def rate_from_si(self, hertz: float) -> float:
        if self.linewidth_hz is None:
            raise ConfigError("linewidth_hz not set on UnitSystem")
        return hertz / self.linewidth_hz


@dataclass(frozen=True)
class SpeciesParams:
    """Detuning and linewidth of one species, both in units of gamma."""

    label: str
    detuning: float
    linewidth: float = GAMMA

    def __post_init__(self) -> None:
        if self.label not in ("A", "B"):
            raise ConfigError(f"species label must be 'A' or 'B', got {self.label!r}")
        _require_finite("detuning", self.detuning)
        if not (math.isfinite(self.linewidth) and self.linewidth > 0):
            raise ConfigError(f"linewidth must be positive, got {self.linewidth!r}")

    @property
    def coupling(self) -> complex:
        return coupling_from_detuning(self.detuning, self.linewidth)


def coupling_from_detuning(delta: float, gamma_s: float = GAMMA) -> complex:
    """Complex coupling g = -3*(gamma_s/2)/(delta + i*gamma_s/2).

    This is the single dimensionless prefactor (in lambda = 1 units) by
    which a dipole's local field sources its scattered field:
    E(r) = E_inc(r) + sum_n g_n G(r, r_n) E(r_n).  The polarizability and
    the field-to-dipole constant are fused into g, so Im(g) >= 0 always
    (a passive scatterer).
    """
    delta = _require_finite("detuning", delta)
    gamma_s = float(gamma_s)
    if not (math.isfinite(gamma_s) and gamma_s > 0):
        raise ConfigError(f"linewidth must be positive, got {gamma_s!r}")
    half = 0.5 * gamma_s
    return -3.0 * LAMBDA * half / (delta + 1j * half)


def coupling_asymptotics(delta: float, gamma_s: float = GAMMA) -> tuple[float, float]:
    """Leading-order (Re, Im) of the coupling for |delta| >> gamma_s.

    Re ~ -3*(gamma_s/2)/delta and Im ~ 3*((gamma_s/2)/delta)^2, the
    far-off-resonant expansion of :func:`coupling_from_detuning`.
    Documented validity window: |delta| >= 10*gamma_s.
    """
    delta = _require_finite("detuning", delta)
    gamma_s = float(gamma_s)
    if not (math.isfinite(gamma_s) and gamma_s > 0):
        raise ConfigError(f"linewidth must be positive, got {gamma_s!r}")
    if delta == 0.0:
        raise ConfigError("asymptotic coupling is singular at delta = 0")
    half = 0.5 * gamma_s
    ratio = half / delta
    return -3.0 * LAMBDA * ratio, 3.0 * LAMBDA * ratio * ratio


def linewidth_from_dipole_SI(d: float, omega: float) -> float:
    """Spontaneous decay rate gamma = d^2 w^3 / (3 pi eps0 hbar c^3).

    ``d`` is the transition dipole moment in C*m, ``omega`` the angular
    transition frequency in rad/s.  Returns the literal formula value in
    1/s.  Used only for experimental-proposal reporting.
    """
    d = float(d)
    omega = float(omega)
    if not (math.isfinite(d) and d > 0):
        raise ConfigError(f"dipole moment must be positive, got {d!r}")
    if not (math.isfinite(omega) and omega > 0):
        raise ConfigError(f"angular frequency must be positive, got {omega!r}")
    return (d * d * omega**3) / (
        3.0 * math.pi * _const.epsilon_0 * _const.hbar * _const.c**3
    )
