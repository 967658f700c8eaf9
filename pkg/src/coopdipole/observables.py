"""Lens-integrated transmitted power, transmission coefficients, and
polarization-state descriptors.

Transmission follows the plane-wave power convention: the flux density
through the lens plane is (eps0 c / 2)(|E_x|^2 + |E_y|^2), integrated over
the lens disk with a polar tensor-product quadrature (Gauss-Legendre in r,
midpoint in theta).  In natural units eps0 c / 2 = 1/2.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .beam import GaussianBeam
from .errors import ConfigError
from .fields import total_field
from .geometry import AtomArray
from .solver import DipoleSolution


@dataclass(frozen=True)
class LensConfig:
    """Collection disk: plane z, radius, and quadrature sizes.

    Defaults are z = 150, radius = 90 wavelengths, an NA = 0.6 collection
    geometry (numerical aperture radius/z).  n_theta should stay divisible by 4
    so the angular grid is closed under the x <-> y mirror.
    """

    z: float = 150.0
    radius: float = 90.0
    n_r: int = 200
    n_theta: int = 256

    def __post_init__(self) -> None:
        if not (self.z > 0 and self.radius > 0):
            raise ConfigError("lens plane and radius must be positive")
        if self.n_r < 8 or self.n_theta < 8:
            raise ConfigError("quadrature sizes must be >= 8")

    @property
    def numerical_aperture(self) -> float:
        """radius/z, the convention used alongside the defaults (0.6).

        Note this is the tangent of the collection half-angle; the
        textbook sine definition would give radius/hypot(radius, z).
        """
        return self.radius / self.z

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """(points (n_r*n_theta, 3), area weights) over the lens disk."""
        nodes, wts = leggauss(self.n_r)
        r = 0.5 * self.radius * (nodes + 1.0)
        wr = 0.5 * self.radius * wts * r  # includes the polar Jacobian r
        dtheta = 2.0 * math.pi / self.n_theta
        theta = (np.arange(self.n_theta) + 0.5) * dtheta
        pts = np.zeros((self.n_r * self.n_theta, 3))
        pts[:, 0] = np.outer(r, np.cos(theta)).ravel()
        pts[:, 1] = np.outer(r, np.sin(theta)).ravel()
        pts[:, 2] = self.z
        weights = np.repeat(wr, self.n_theta) * dtheta
        return pts, weights


@dataclass(frozen=True)
class TransmissionResult:
    """Polarization-resolved transmitted powers and coefficients."""

    power: float
    power_x: float
    power_y: float
    power_inc: float
    power_inc_x: float
    power_inc_y: float
    lens: LensConfig

    @property
    def t(self) -> float:
        return self.power / self.power_inc

    @property
    def t_x(self) -> float:
        return self.power_x / self.power_inc_x

    @property
    def t_y(self) -> float:
        return self.power_y / self.power_inc_y

    def to_dict(self) -> dict:
        return {
            "T": self.t,
            "T_x": self.t_x,
            "T_y": self.t_y,
            "P": self.power,
            "P_x": self.power_x,
            "P_y": self.power_y,
            "P_inc": self.power_inc,
            "P_inc_x": self.power_inc_x,
            "P_inc_y": self.power_inc_y,
            "lens": {
                "z": self.lens.z,
                "radius": self.lens.radius,
                "n_r": self.lens.n_r,
                "n_theta": self.lens.n_theta,
                "numerical_aperture": self.lens.numerical_aperture,
            },
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def lens_power(evaluator, lens: LensConfig) -> tuple[float, float, float]:
    """(P, P_x, P_y) collected by the lens disk.

    ``evaluator`` maps points (P, 3) to complex fields (P, 3); P_mu =
    (1/2) sum w |E_mu|^2 and P = P_x + P_y.
    """
    pts, weights = lens.quadrature()
    e = np.asarray(evaluator(pts), dtype=complex)
    p_x = 0.5 * float(weights @ np.abs(e[:, 0]) ** 2)
    p_y = 0.5 * float(weights @ np.abs(e[:, 1]) ** 2)
    return p_x + p_y, p_x, p_y


def transmission(
    solution: DipoleSolution,
    array: AtomArray,
    beam: GaussianBeam,
    lens: LensConfig | None = None,
    threads: int | None = None,
) -> TransmissionResult:
    """T = P/P_inc with identical quadrature for numerator and denominator."""
    lens = lens or LensConfig()
    p, p_x, p_y = lens_power(
        lambda pts: total_field(solution, array, beam, pts, threads=threads),
        lens,
    )
    p_inc, p_inc_x, p_inc_y = lens_power(beam.field, lens)
    return TransmissionResult(
        power=p, power_x=p_x, power_y=p_y,
        power_inc=p_inc, power_inc_x=p_inc_x, power_inc_y=p_inc_y,
        lens=lens,
    )


@dataclass(frozen=True)
class StokesState:
    """Stokes parameters of a transverse field, with ellipse angles.

    psi is the ellipse orientation (radians from +x), chi the ellipticity
    angle.  ``defined`` is False where S0 = 0 (angles set to NaN).
    """

    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    psi: np.ndarray
    chi: np.ndarray
    defined: np.ndarray


def stokes(e_x, e_y) -> StokesState:
    """Stokes parameters from the transverse components (elementwise)."""
    e_x = np.asarray(e_x, dtype=complex)
    e_y = np.asarray(e_y, dtype=complex)
    s0 = np.abs(e_x) ** 2 + np.abs(e_y) ** 2
    s1 = np.abs(e_x) ** 2 - np.abs(e_y) ** 2
    cross = np.conj(e_x) * e_y
    s2 = 2.0 * cross.real
    s3 = 2.0 * cross.imag
    defined = s0 > 0.0
    psi = np.where(defined, 0.5 * np.arctan2(s2, s1), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(defined, s3 / np.where(defined, s0, 1.0), np.nan)
    chi = 0.5 * np.arcsin(np.clip(ratio, -1.0, 1.0))
    return StokesState(s0=s0, s1=s1, s2=s2, s3=s3, psi=psi, chi=chi,
                       defined=defined)


def grid_stokes(values: np.ndarray) -> dict:
    """Stokes columns for a field grid (n_y, n_x, 3), keyed by CSV name."""
    st = stokes(values[..., 0], values[..., 1])
    return {
        "S0": st.s0, "S1": st.s1, "S2": st.s2, "S3": st.s3,
        "psi": st.psi, "chi": st.chi,
    }
