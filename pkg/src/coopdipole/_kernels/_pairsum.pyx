# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled pairwise Green-function kernels (OpenMP parallel).

Mirrors ``_fallback`` exactly in signatures and return conventions; each
kernel additionally takes ``num_threads``.  Work is split so every output
slot is written by exactly one thread and accumulated sequentially, which
keeps results independent of the thread count.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport cos, sin, sqrt, exp, M_PI

cnp.import_array()

DEF SITES_CHUNK = 8192

cdef double FOUR_PI = 4.0 * M_PI


cdef inline long _green_chunk(const double* sites, long lo, long hi,
                              double kx, double ky, double k, double eta,
                              double min_r, double complex* acc) noexcept nogil:
    """Accumulate the six independent dyadic components over sites[lo:hi].

    acc must hold 6 zero-initialized slots (xx, yy, zz, xy, xz, yz).
    Returns the first site index with r < min_r, or -1.
    """
    cdef long i, bad = -1
    cdef double x, y, z, r2, r, kr, inv_kr, inv_kr2, ph, damp
    cdef double nx, ny, nz
    cdef double complex pref, c1, c2, w, wc1, wc2
    for i in range(lo, hi):
        x = sites[3 * i]
        y = sites[3 * i + 1]
        z = sites[3 * i + 2]
        r2 = x * x + y * y + z * z
        r = sqrt(r2)
        if r < min_r:
            if bad < 0:
                bad = i
            continue
        kr = k * r
        inv_kr = 1.0 / kr
        inv_kr2 = inv_kr * inv_kr
        pref = (cos(kr) + 1j * sin(kr)) / (FOUR_PI * r)
        c1 = (1.0 - inv_kr2) + 1j * inv_kr
        c2 = (-1.0 + 3.0 * inv_kr2) - 1j * (3.0 * inv_kr)
        ph = -(kx * x + ky * y)
        w = pref * (cos(ph) + 1j * sin(ph))
        if eta > 0.0:
            w = w * exp(-eta * r)
        nx = x / r
        ny = y / r
        nz = z / r
        wc1 = w * c1
        wc2 = w * c2
        acc[0] = acc[0] + wc1 + wc2 * nx * nx
        acc[1] = acc[1] + wc1 + wc2 * ny * ny
        acc[2] = acc[2] + wc1 + wc2 * nz * nz
        acc[3] = acc[3] + wc2 * nx * ny
        acc[4] = acc[4] + wc2 * nx * nz
        acc[5] = acc[5] + wc2 * ny * nz
    return bad


def green_sum_sites(const double[:, ::1] sites, double kx, double ky, double k,
                    double eta, double min_r, int num_threads):
    cdef long n = sites.shape[0]
    cdef long n_chunks = (n + SITES_CHUNK - 1) // SITES_CHUNK
    if n_chunks < 1:
        n_chunks = 1
    partials_np = np.zeros((n_chunks, 6), dtype=np.complex128)
    bads_np = np.full(n_chunks, -1, dtype=np.int64)
    cdef double complex[:, ::1] partials = partials_np
    cdef cnp.int64_t[::1] bads = bads_np
    if n == 0:
        return partials_np, bads_np
    cdef const double* base = &sites[0, 0]
    cdef long c, lo, hi
    for c in prange(n_chunks, nogil=True, schedule='static',
                    num_threads=num_threads):
        lo = c * SITES_CHUNK
        hi = lo + SITES_CHUNK
        if hi > n:
            hi = n
        bads[c] = _green_chunk(base, lo, hi, kx, ky, k, eta, min_r,
                               &partials[c, 0])
    return partials_np, bads_np


cdef inline long _point_sum(const double* pt, const double* pos,
                            const double complex* wts, long n, long skip,
                            double k, double min_r,
                            double complex* out3) noexcept nogil:
    """out3 += sum over sources of G(pt, pos[j]) @ wts[j], skipping index
    ``skip`` (pass -1 for none).  Returns first source with r < min_r."""
    cdef long j, bad = -1
    cdef double dx, dy, dz, r2, r, kr, inv_kr, inv_kr2, dot_r, dot_i
    cdef double complex pref, c1, c2, dot, s
    for j in range(n):
        if j == skip:
            continue
        dx = pt[0] - pos[3 * j]
        dy = pt[1] - pos[3 * j + 1]
        dz = pt[2] - pos[3 * j + 2]
        r2 = dx * dx + dy * dy + dz * dz
        r = sqrt(r2)
        if r < min_r:
            if bad < 0:
                bad = j
            continue
        kr = k * r
        inv_kr = 1.0 / kr
        inv_kr2 = inv_kr * inv_kr
        pref = (cos(kr) + 1j * sin(kr)) / (FOUR_PI * r)
        c1 = (1.0 - inv_kr2) + 1j * inv_kr
        c2 = (-1.0 + 3.0 * inv_kr2) - 1j * (3.0 * inv_kr)
        dot = dx * wts[3 * j] + dy * wts[3 * j + 1] + dz * wts[3 * j + 2]
        s = pref * c2 * dot / r2
        pref = pref * c1
        out3[0] = out3[0] + pref * wts[3 * j] + s * dx
        out3[1] = out3[1] + pref * wts[3 * j + 1] + s * dy
        out3[2] = out3[2] + pref * wts[3 * j + 2] + s * dz
    return bad


def scattered_sum(const double[:, ::1] points, const double[:, ::1] positions,
                  const double complex[:, ::1] weights, double k, double min_r,
                  int num_threads):
    cdef long n_points = points.shape[0]
    cdef long n = positions.shape[0]
    out_np = np.zeros((n_points, 3), dtype=np.complex128)
    bads_np = np.full(n_points, -1, dtype=np.int64)
    cdef double complex[:, ::1] out = out_np
    cdef cnp.int64_t[::1] bads = bads_np
    if n_points == 0 or n == 0:
        return out_np, bads_np
    cdef const double* pos = &positions[0, 0]
    cdef const double* pts = &points[0, 0]
    cdef const double complex* wts = &weights[0, 0]
    cdef long p
    for p in prange(n_points, nogil=True, schedule='static',
                    num_threads=num_threads):
        bads[p] = _point_sum(&pts[3 * p], pos, wts, n, -1, k, min_r,
                             &out[p, 0])
    return out_np, bads_np


def interaction_matvec(const double[:, ::1] positions,
                       const double complex[:, ::1] weights, double k,
                       double min_r, int num_threads):
    cdef long n = positions.shape[0]
    out_np = np.zeros((n, 3), dtype=np.complex128)
    bads_np = np.full(n, -1, dtype=np.int64)
    cdef double complex[:, ::1] out = out_np
    cdef cnp.int64_t[::1] bads = bads_np
    if n == 0:
        return out_np, bads_np
    cdef const double* pos = &positions[0, 0]
    cdef const double complex* wts = &weights[0, 0]
    cdef long m
    for m in prange(n, nogil=True, schedule='static',
                    num_threads=num_threads):
        bads[m] = _point_sum(&pos[3 * m], pos, wts, n, m, k, min_r,
                             &out[m, 0])
    return out_np, bads_np


cdef inline long _matrix_row(const double* pos, const double complex* g,
                             long n, long m, long stride, double k,
                             double min_r,
                             double complex* row) noexcept nogil:
    """Fill rows 3m..3m+2 of the dense coupling matrix.

    ``row`` points at element (3m, 0); ``stride`` is the row stride (3n).
    Returns first source with r < min_r, or -1.
    """
    cdef long j, bad = -1
    cdef double dx, dy, dz, r2, r, kr, inv_kr, inv_kr2
    cdef double complex pref, c1, c2, q
    for j in range(n):
        if j == m:
            continue
        dx = pos[3 * m] - pos[3 * j]
        dy = pos[3 * m + 1] - pos[3 * j + 1]
        dz = pos[3 * m + 2] - pos[3 * j + 2]
        r2 = dx * dx + dy * dy + dz * dz
        r = sqrt(r2)
        if r < min_r:
            if bad < 0:
                bad = j
            continue
        kr = k * r
        inv_kr = 1.0 / kr
        inv_kr2 = inv_kr * inv_kr
        pref = g[j] * (cos(kr) + 1j * sin(kr)) / (FOUR_PI * r)
        c1 = (1.0 - inv_kr2) + 1j * inv_kr
        c2 = (-1.0 + 3.0 * inv_kr2) - 1j * (3.0 * inv_kr)
        q = pref * c2 / r2
        row[3 * j] = pref * c1 + q * dx * dx
        row[3 * j + 1] = q * dx * dy
        row[3 * j + 2] = q * dx * dz
        row[stride + 3 * j] = q * dy * dx
        row[stride + 3 * j + 1] = pref * c1 + q * dy * dy
        row[stride + 3 * j + 2] = q * dy * dz
        row[2 * stride + 3 * j] = q * dz * dx
        row[2 * stride + 3 * j + 1] = q * dz * dy
        row[2 * stride + 3 * j + 2] = pref * c1 + q * dz * dz
    return bad


def interaction_matrix(const double[:, ::1] positions,
                       const double complex[::1] couplings, double k,
                       double min_r, int num_threads):
    cdef long n = positions.shape[0]
    mat_np = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    bads_np = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] bads = bads_np
    if n == 0:
        return mat_np, bads_np
    cdef double complex[:, ::1] mat = mat_np
    cdef const double* pos = &positions[0, 0]
    cdef const double complex* g = &couplings[0]
    cdef long stride = 3 * n
    cdef long m
    for m in prange(n, nogil=True, schedule='static',
                    num_threads=num_threads):
        bads[m] = _matrix_row(pos, g, n, m, stride, k, min_r,
                              &mat[3 * m, 0])
    return mat_np, bads_np
