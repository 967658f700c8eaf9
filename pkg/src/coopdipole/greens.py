"""Free-space dyadic Green's function for a point dipole.

G connects a dipole source to its radiated field:

    G_vu(R) = e^{ikR}/(4 pi R) [(1 + (ikR - 1)/(kR)^2) delta_vu
              + (-1 + (3 - 3ikR)/(kR)^2) R_v R_u / R^2]

with R = r - r'.  Entries carry units 1/length.  Scalar pair evaluation
lives here; bulk O(N^2) paths go through the ``_kernels`` backends, which
implement the identical formula.
"""
from __future__ import annotations

import numpy as np

from .core import K
from .errors import CoincidentPointError

#: Pair separations below this (in wavelengths) are rejected as coincident.
R_FLOOR = 1e-9


def _terms(rvec: np.ndarray, k: float):
    r2 = float(rvec @ rvec)
    r = np.sqrt(r2)
    if r < R_FLOOR:
        raise CoincidentPointError(
            f"green function requested at separation {r:.3e} < {R_FLOOR} wavelengths"
        )
    kr = k * r
    inv_kr2 = 1.0 / (kr * kr)
    pref = np.exp(1j * kr) / (4.0 * np.pi * r)
    c1 = (1.0 + (1j * kr - 1.0) * inv_kr2) * pref
    c2 = (-1.0 + (3.0 - 3j * kr) * inv_kr2) * pref / r2
    return c1, c2


def green_tensor(r, r_prime, k: float = K) -> np.ndarray:
    """3x3 complex dyadic Green tensor for the pair (r, r_prime)."""
    rvec = np.asarray(r, dtype=float) - np.asarray(r_prime, dtype=float)
    c1, c2 = _terms(rvec, k)
    return c1 * np.eye(3) + c2 * np.outer(rvec, rvec)


def green_apply(r, r_prime, k: float = K, v=None) -> np.ndarray:
    """green_tensor(r, r_prime, k) @ v without materializing the matrix."""
    rvec = np.asarray(r, dtype=float) - np.asarray(r_prime, dtype=float)
    v = np.asarray(v, dtype=complex)
    c1, c2 = _terms(rvec, k)
    return c1 * v + c2 * (rvec @ v) * rvec
