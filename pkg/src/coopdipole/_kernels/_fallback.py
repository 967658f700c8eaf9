"""Pure-numpy implementations of the pairwise Green-function kernels.

Used when the compiled extension is unavailable.  Signatures and return
conventions match ``_pairsum`` exactly: every kernel returns its payload
plus an int64 array of "bad" indices (-1 where fine) so the dispatch layer
in ``__init__`` can raise uniform errors.

Chunk sizes are fixed constants so that summation order, and therefore the
floating-point result, is reproducible run to run.
"""
import numpy as np

FOUR_PI = 4.0 * np.pi

# Fixed chunk sizes (rows / points per vectorized block).
_SITES_CHUNK = 8192
_POINTS_CHUNK = 1024
_ROWS_CHUNK = 256


def _terms(r, k):
    """Scalar factors of the dyadic Green's function at separations ``r``:
    G = pref * (c1 * I + c2 * outer(R, R) / r^2).  ``r`` must be > 0."""
    kr = k * r
    inv_kr = 1.0 / kr
    inv_kr2 = inv_kr * inv_kr
    pref = np.exp(1j * kr) / (FOUR_PI * r)
    c1 = (1.0 - inv_kr2) + 1j * inv_kr
    c2 = (-1.0 + 3.0 * inv_kr2) - 3j * inv_kr
    return pref, c1, c2


def _masked_terms(diff, k, dead):
    """(r2, pref, c1, c2) for displacement vectors ``diff`` (..., 3), with
    pref zeroed and r2 set to 1 on entries flagged ``dead`` so every factor
    stays finite."""
    r2 = np.einsum("...i,...i->...", diff, diff)
    r2 = np.where(dead, 1.0, r2)
    pref, c1, c2 = _terms(np.sqrt(r2), k)
    pref = np.where(dead, 0.0, pref)
    return r2, pref, c1, c2


def green_sum_sites(sites, kx, ky, k, eta, min_r):
    """Sum G(0, r) * exp(-i k_par . r) [* exp(-eta r)] over explicit sites.

    Returns (partials, bads): partials is (n_chunks, 6) complex with the
    independent components (xx, yy, zz, xy, xz, yz) per chunk; bads is
    (n_chunks,) int64 holding the index of a site below ``min_r`` or -1.
    """
    n = sites.shape[0]
    n_chunks = max(1, (n + _SITES_CHUNK - 1) // _SITES_CHUNK)
    partials = np.zeros((n_chunks, 6), dtype=np.complex128)
    bads = np.full(n_chunks, -1, dtype=np.int64)
    for c in range(n_chunks):
        lo = c * _SITES_CHUNK
        hi = min(lo + _SITES_CHUNK, n)
        if lo >= hi:
            continue
        block = sites[lo:hi]
        r = np.sqrt(np.einsum("ij,ij->i", block, block))
        small = r < min_r
        if np.any(small):
            bads[c] = lo + int(np.argmax(small))
            block = block[~small]
            r = r[~small]
            if block.shape[0] == 0:
                continue
        pref, c1, c2 = _terms(r, k)
        phase = np.exp(-1j * (kx * block[:, 0] + ky * block[:, 1]))
        if eta > 0.0:
            phase = phase * np.exp(-eta * r)
        w = pref * phase
        nhat = block / r[:, None]
        wc1 = w * c1
        wc2 = w * c2
        partials[c, 0] = np.sum(wc1 + wc2 * nhat[:, 0] * nhat[:, 0])
        partials[c, 1] = np.sum(wc1 + wc2 * nhat[:, 1] * nhat[:, 1])
        partials[c, 2] = np.sum(wc1 + wc2 * nhat[:, 2] * nhat[:, 2])
        partials[c, 3] = np.sum(wc2 * nhat[:, 0] * nhat[:, 1])
        partials[c, 4] = np.sum(wc2 * nhat[:, 0] * nhat[:, 2])
        partials[c, 5] = np.sum(wc2 * nhat[:, 1] * nhat[:, 2])
    return partials, bads


def _record_bads(bads, lo, hi, small):
    """Store the first offending source index for any row with a small
    separation.  Returns the row-wise dead mask including those rows."""
    rows = np.any(small, axis=1)
    if np.any(rows):
        bads[lo:hi][rows] = np.argmax(small[rows], axis=1)
    return small


def scattered_sum(points, positions, weights, k, min_r):
    """out[p] = sum_n G(points[p], positions[n]) @ weights[n].

    Returns (out, bads): out (P, 3) complex; bads (P,) int64 with the index
    of a source closer than ``min_r`` to the point, or -1.
    """
    n_points = points.shape[0]
    out = np.zeros((n_points, 3), dtype=np.complex128)
    bads = np.full(n_points, -1, dtype=np.int64)
    if positions.shape[0] == 0:
        return out, bads
    for lo in range(0, n_points, _POINTS_CHUNK):
        hi = min(lo + _POINTS_CHUNK, n_points)
        diff = points[lo:hi, None, :] - positions[None, :, :]  # (C, N, 3)
        r = np.sqrt(np.einsum("cnj,cnj->cn", diff, diff))
        dead = _record_bads(bads, lo, hi, r < min_r)
        r2, pref, c1, c2 = _masked_terms(diff, k, dead)
        dot = np.einsum("cnj,nj->cn", diff, weights)
        contrib = pref[..., None] * (
            c1[..., None] * weights[None, :, :]
            + (c2 * dot / r2)[..., None] * diff
        )
        out[lo:hi] = np.sum(contrib, axis=1)
    return out, bads


def interaction_matvec(positions, weights, k, min_r):
    """out[m] = sum_{n != m} G(positions[m], positions[n]) @ weights[n].

    Returns (out, bads) as in :func:`scattered_sum`.
    """
    n = positions.shape[0]
    out = np.zeros((n, 3), dtype=np.complex128)
    bads = np.full(n, -1, dtype=np.int64)
    for lo in range(0, n, _ROWS_CHUNK):
        hi = min(lo + _ROWS_CHUNK, n)
        diff = positions[lo:hi, None, :] - positions[None, :, :]
        r = np.sqrt(np.einsum("cnj,cnj->cn", diff, diff))
        rows = np.arange(lo, hi)
        own = np.zeros_like(r, dtype=bool)
        own[rows - lo, rows] = True  # self term excluded
        dead = _record_bads(bads, lo, hi, (r < min_r) & ~own) | own
        r2, pref, c1, c2 = _masked_terms(diff, k, dead)
        dot = np.einsum("cnj,nj->cn", diff, weights)
        contrib = pref[..., None] * (
            c1[..., None] * weights[None, :, :]
            + (c2 * dot / r2)[..., None] * diff
        )
        out[lo:hi] = np.sum(contrib, axis=1)
    return out, bads


def interaction_matrix(positions, couplings, k, min_r):
    """Dense coupling matrix M with 3x3 blocks M[m, n] = g_n G(r_m, r_n),
    n != m, and exactly-zero diagonal blocks.

    Returns (M, bads): M (3N, 3N) complex; bads (N,) int64 per source row.
    """
    n = positions.shape[0]
    mat = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    bads = np.full(n, -1, dtype=np.int64)
    eye = np.eye(3)
    for lo in range(0, n, _ROWS_CHUNK):
        hi = min(lo + _ROWS_CHUNK, n)
        diff = positions[lo:hi, None, :] - positions[None, :, :]
        r = np.sqrt(np.einsum("cnj,cnj->cn", diff, diff))
        rows = np.arange(lo, hi)
        own = np.zeros_like(r, dtype=bool)
        own[rows - lo, rows] = True
        dead = _record_bads(bads, lo, hi, (r < min_r) & ~own) | own
        r2, pref, c1, c2 = _masked_terms(diff, k, dead)
        outer = diff[:, :, :, None] * diff[:, :, None, :] / r2[..., None, None]
        blocks = (pref * couplings[None, :])[..., None, None] * (
            c1[..., None, None] * eye + c2[..., None, None] * outer
        )
        mat[3 * lo : 3 * hi] = blocks.transpose(0, 2, 1, 3).reshape(
            3 * (hi - lo), 3 * n
        )
    return mat, bads
