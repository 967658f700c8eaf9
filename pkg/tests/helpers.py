"""Independent reference implementations used as test oracles.

Everything here is deliberately written the slow, obvious way (explicit
loops, finite differences, compensated sums) so that agreement with the
package is evidence, not circularity.
"""

import cmath
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def scalar_green(rvec, k):
    """Scalar Helmholtz kernel e^{ikR} / (4 pi R)."""
    r = math.sqrt(rvec[0] ** 2 + rvec[1] ** 2 + rvec[2] ** 2)
    return cmath.exp(1j * k * r) / (4.0 * math.pi * r)


def fd_green_tensor(rvec, k, h=1e-4):
    """Dyadic Green tensor via central finite differences.

    Differentiates G_ij = (delta_ij + d_i d_j / k^2) g(R) numerically, so
    it shares no algebra with the closed-form tensor it checks.
    """
    rvec = np.asarray(rvec, dtype=float)
    out = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            if i == j:
                step = np.zeros(3)
                step[i] = h
                second = (
                    scalar_green(rvec + step, k)
                    - 2.0 * scalar_green(rvec, k)
                    + scalar_green(rvec - step, k)
                ) / h**2
            else:
                si = np.zeros(3)
                sj = np.zeros(3)
                si[i] = h
                sj[j] = h
                second = (
                    scalar_green(rvec + si + sj, k)
                    - scalar_green(rvec + si - sj, k)
                    - scalar_green(rvec - si + sj, k)
                    + scalar_green(rvec - si - sj, k)
                ) / (4.0 * h**2)
            out[i, j] = (1.0 if i == j else 0.0) * scalar_green(rvec, k) \
                + second / k**2
    return out


def two_atom_elimination(r1, r2, g1, g2, e1, e2, green):
    """Closed-form solution of the two-atom coupled system.

    Eliminates atom 2 from
        E1 = e1 + g2 G12 E2,   E2 = e2 + g1 G21 E1
    leaving one 3x3 system per atom; the production solver never takes
    this path (it factors the full 6x6 operator).
    """
    g12 = green(np.asarray(r1, float), np.asarray(r2, float))
    g21 = green(np.asarray(r2, float), np.asarray(r1, float))
    eye = np.eye(3)
    lhs = eye - g1 * g2 * (g12 @ g21)
    rhs = np.asarray(e1, complex) + g2 * (g12 @ np.asarray(e2, complex))
    field1 = np.linalg.solve(lhs, rhs)
    field2 = np.asarray(e2, complex) + g1 * (g21 @ field1)
    return field1, field2


def brute_matvec(positions, weights, vec, green):
    """Direct double loop for sum_n g_n G(r_m, r_n) v_n, m != n."""
    n = len(positions)
    out = np.zeros((n, 3), dtype=complex)
    for m in range(n):
        for j in range(n):
            if j == m:
                continue
            out[m] += weights[j] * (green(positions[m], positions[j])
                                    @ vec[j])
    return out


def brute_scattered(points, positions, sources, green):
    """Direct loop for the field radiated by per-atom source vectors."""
    out = np.zeros((len(points), 3), dtype=complex)
    for p, pt in enumerate(points):
        for j in range(len(positions)):
            out[p] += green(pt, positions[j]) @ sources[j]
    return out


def brute_phased_sum(sites, k_par, green):
    """Compensated lattice sum sum_n G(0, r_n) e^{-i k_par . r_n}.

    Accumulates each tensor entry with math.fsum over real and imaginary
    parts separately, independent of the chunked production kernel.
    """
    parts_re = [[[] for _ in range(3)] for _ in range(3)]
    parts_im = [[[] for _ in range(3)] for _ in range(3)]
    origin = np.zeros(3)
    for site in sites:
        phase = cmath.exp(-1j * (k_par[0] * site[0] + k_par[1] * site[1]))
        g = green(origin, site) * phase
        for i in range(3):
            for j in range(3):
                parts_re[i][j].append(g[i, j].real)
                parts_im[i][j].append(g[i, j].imag)
    out = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            out[i, j] = math.fsum(parts_re[i][j]) \
                + 1j * math.fsum(parts_im[i][j])
    return out


def stripe_labels_reference(n_x, n_y, swap=False):
    """Row-major species labels built with plain Python loops."""
    labels = []
    for row in range(n_y):
        for _ in range(n_x):
            even = row % 2 == 0
            if swap:
                labels.append("B" if even else "A")
            else:
                labels.append("A" if even else "B")
    return labels
