"""Incident fields: paraxial Gaussian beam and plane wave.

The Gaussian beam propagates along +z with the waist at z = 0:

    E(r) = E0 (w0/w(z)) e^{ikz} e^{-i phi(z)} e^{-rho^2/w^2(z)}
           e^{i k rho^2 / (2 R(z))} e_d

with w(z) = w0 sqrt(1 + (z/z_R)^2), z_R = pi w0^2, phi(z) = arctan(z/z_R),
and the curvature entering through 1/R(z) = z/(z^2 + z_R^2) so z = 0 is
regular.  The Gouy factor carries the e^{-i phi} sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import E0, K, LAMBDA
from .errors import ConfigError


def linear_polarization(axis: str) -> np.ndarray:
    if axis == "x":
        return np.array([1.0, 0.0, 0.0], dtype=complex)
    if axis == "y":
        return np.array([0.0, 1.0, 0.0], dtype=complex)
    raise ConfigError(f"linear polarization axis must be 'x' or 'y', got {axis!r}")


def diagonal_polarization() -> np.ndarray:
    """(e_x + e_y)/sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    return np.array([s, s, 0.0], dtype=complex)


def circular_polarization(handedness: str) -> np.ndarray:
    """(e_x +- i e_y)/sqrt(2); "right" is +i (Stokes S3 = +1)."""
    s = 1.0 / math.sqrt(2.0)
    if handedness == "right":
        return np.array([s, 1j * s, 0.0])
    if handedness == "left":
        return np.array([s, -1j * s, 0.0])
    raise ConfigError(f"handedness must be 'right' or 'left', got {handedness!r}")


def named_polarization(name: str) -> np.ndarray:
    """Polarization vector by name: x, y, diagonal, right, left."""
    if name in ("x", "y"):
        return linear_polarization(name)
    if name == "diagonal":
        return diagonal_polarization()
    if name in ("right", "left"):
        return circular_polarization(name)
    raise ConfigError(f"unknown polarization {name!r}")


def waist_rule(n_atoms: int, a: float, coefficient: float = 0.3) -> float:
    """Beam waist matched to the array size: w0 = coefficient*sqrt(N)*a."""
    if n_atoms < 1 or a <= 0 or coefficient <= 0:
        raise ConfigError("waist rule requires N >= 1, a > 0, coefficient > 0")
    return coefficient * math.sqrt(n_atoms) * a


def _check_polarization(e_d) -> np.ndarray:
    e_d = np.asarray(e_d, dtype=complex)
    if e_d.shape != (3,):
        raise ConfigError("polarization must be a 3-vector")
    if abs(np.linalg.norm(e_d) - 1.0) > 1e-12:
        raise ConfigError("polarization vector must have unit norm")
    if abs(e_d[2]) > 1e-12:
        raise ConfigError("polarization must be transverse (zero z-component)")
    e_d.setflags(write=False)
    return e_d


@dataclass(frozen=True)
class GaussianBeam:
    """Paraxial Gaussian beam along +z, waist w0 at z = 0."""

    waist: float
    polarization: np.ndarray = field(default_factory=diagonal_polarization)
    amplitude: float = E0
    k: float = K

    def __post_init__(self) -> None:
        if not (self.waist > 0):
            raise ConfigError(f"waist must be positive, got {self.waist!r}")
        object.__setattr__(self, "polarization",
                           _check_polarization(self.polarization))

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist**2 / LAMBDA

    def field(self, points) -> np.ndarray:
        """Complex field at points (..., 3); returns (..., 3)."""
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
        rho2 = x * x + y * y
        z_r = self.rayleigh_range
        zz = z * z + z_r * z_r
        w = self.waist * np.sqrt(zz) / z_r  # w0 sqrt(1 + (z/z_R)^2)
        inv_r = z / zz
        gouy = np.arctan(z / z_r)
        envelope = (self.amplitude * self.waist / w) * np.exp(-rho2 / (w * w))
        phase = self.k * z - gouy + 0.5 * self.k * rho2 * inv_r
        scalar_field = envelope * np.exp(1j * phase)
        out = scalar_field[..., None] * self.polarization
        return out[0] if scalar else out


@dataclass(frozen=True)
class PlaneWave:
    """Plane wave propagating along +z."""

    polarization: np.ndarray = field(default_factory=diagonal_polarization)
    amplitude: float = E0
    k: float = K

    def __post_init__(self) -> None:
        object.__setattr__(self, "polarization",
                           _check_polarization(self.polarization))

    def field(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = (self.amplitude * np.exp(1j * self.k * pts[..., 2]))[..., None] \
            * self.polarization
        return out[0] if scalar else out
