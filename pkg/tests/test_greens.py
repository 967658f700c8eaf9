"""Dyadic Green tensor against a finite-difference oracle and symmetries."""

import numpy as np
import pytest

from coopdipole.core import K
from coopdipole.errors import CoincidentPointError
from coopdipole.greens import green_apply, green_tensor

from helpers import fd_green_tensor

ORIGIN = np.zeros(3)
Z_HAT = np.array([0.0, 0.0, 1.0])

# Frozen values for separation one wavelength along z.  G_zz in closed
# form collapses to (1 - 2*pi*i)/(8*pi^3); G_xx was frozen from the
# finite-difference oracle below.
G_XX_AT_Z = 0.0775617506438727 + 0.012665147955292205j
G_ZZ_AT_Z = (1.0 - 2.0j * np.pi) / (8.0 * np.pi**3)


def test_axis_aligned_values():
    g = green_tensor(Z_HAT, ORIGIN)
    assert abs(g[0, 0] - G_XX_AT_Z) < 1e-12
    assert abs(g[1, 1] - G_XX_AT_Z) < 1e-12
    assert abs(g[2, 2] - G_ZZ_AT_Z) < 1e-14
    # R x R picks no off-diagonal components for axis-aligned separation
    off = np.abs(g - np.diag(np.diag(g))).max()
    assert off == 0.0


def test_finite_difference_oracle():
    """Closed form vs numerical grad-grad of exp(ikR)/(4 pi R)."""
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(60):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        kr = rng.uniform(0.5, 20.0)
        rvec = direction * (kr / K)
        g = green_tensor(rvec, ORIGIN)
        ref = fd_green_tensor(rvec, K, h=1e-4)
        err = np.linalg.norm(g - ref) / np.linalg.norm(ref)
        worst = max(worst, err)
    print(f"worst FD relative error: {worst:.2e}")
    assert worst < 1e-6


def test_symmetry_and_reciprocity():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        r1 = rng.uniform(-5, 5, size=3)
        r2 = rng.uniform(-5, 5, size=3)
        if np.linalg.norm(r1 - r2) < 1e-3:
            continue
        g12 = green_tensor(r1, r2)
        g21 = green_tensor(r2, r1)
        assert np.abs(g12 - g12.T).max() == 0.0
        assert np.abs(g12 - g21.T).max() == 0.0


def test_rotation_equivariance():
    rng = np.random.default_rng(17)
    for _ in range(25):
        # Random rotation from QR of a Gaussian matrix
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        q = q @ np.diag(np.sign(np.diag(r)))
        r1 = rng.uniform(-2, 2, size=3)
        r2 = rng.uniform(-2, 2, size=3)
        if np.linalg.norm(r1 - r2) < 1e-2:
            continue
        lhs = green_tensor(q @ r1, q @ r2)
        rhs = q @ green_tensor(r1, r2) @ q.T
        assert np.abs(lhs - rhs).max() < 1e-12


def test_far_field_transversality():
    # The longitudinal projection dies off relative to the transverse part
    # as 2/(kR): the 1/R radiation term is purely transverse, and the
    # leading longitudinal contribution is the intermediate-zone term.
    ratios = []
    for kr in (1e3, 1e4):
        rvec = np.array([1.0, 0.0, 0.0]) * (kr / K)
        g = green_tensor(rvec, ORIGIN)
        ratio = abs(g[0, 0]) / abs(g[1, 1])
        print(f"longitudinal/transverse at kR={kr:g}: {ratio:.6e}")
        assert abs(ratio * kr / 2.0 - 1.0) < 1e-4
        ratios.append(ratio)
    assert abs(ratios[0] / ratios[1] - 10.0) < 0.01


def test_short_distance_stability():
    # No blowup to nan/inf anywhere down to the documented floor.
    for r in (1e-8, 1e-6, 1e-3, 1e-1):
        g = green_tensor(np.array([r, 0.0, 0.0]), ORIGIN)
        assert np.all(np.isfinite(g.real)) and np.all(np.isfinite(g.imag))


def test_coincident_points_rejected():
    with pytest.raises(CoincidentPointError):
        green_tensor(ORIGIN, ORIGIN)
    with pytest.raises(CoincidentPointError):
        green_tensor(np.array([1e-10, 0, 0]), ORIGIN)


def test_green_apply_matches_matrix():
    rng = np.random.default_rng(5)
    assert np.all(green_apply(Z_HAT, ORIGIN, v=np.zeros(3)) == 0.0)
    # e_x along z picks out the single diagonal entry
    ex = np.array([1.0, 0.0, 0.0], dtype=complex)
    out = green_apply(Z_HAT, ORIGIN, v=ex)
    assert abs(out[0] - G_XX_AT_Z) < 1e-12
    assert abs(out[1]) == 0.0 and abs(out[2]) == 0.0
    for _ in range(200):
        r1 = rng.uniform(-3, 3, size=3)
        r2 = rng.uniform(-3, 3, size=3)
        if np.linalg.norm(r1 - r2) < 1e-2:
            continue
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        direct = green_tensor(r1, r2) @ v
        applied = green_apply(r1, r2, v=v)
        assert np.abs(applied - direct).max() <= 1e-14 * np.abs(direct).max()
