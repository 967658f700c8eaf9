"""Kernel dispatch: compiled extension if available, numpy fallback otherwise.

The two backends implement identical raw kernels (see ``_fallback``); this
module picks one at import time, normalizes inputs, resolves thread counts,
and converts the raw "bad index" outputs into exceptions.

Set ``COOPDIPOLE_BACKEND=python`` to force the fallback, or
``COOPDIPOLE_THREADS=<n>`` to pin the OpenMP thread count.
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import CoincidentPointError
from . import _fallback

try:
    from . import _pairsum as _compiled
except ImportError:  # pragma: no cover - depends on build environment
    _compiled = None

if os.environ.get("COOPDIPOLE_BACKEND", "").lower() == "python":
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

#: Minimum allowed pair separation, in wavelengths.
MIN_SEPARATION = 1e-9


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def resolve_threads(threads: int | None = None) -> int:
    """Thread count: explicit argument > COOPDIPOLE_THREADS > cpu count."""
    if threads is not None and threads > 0:
        return int(threads)
    env = os.environ.get("COOPDIPOLE_THREADS", "")
    if env.strip():
        try:
            val = int(env)
            if val > 0:
                return val
        except ValueError:
            pass
    return os.cpu_count() or 1


def _get_impl(backend: str | None):
    if backend is None:
        return _compiled if _compiled is not None else _fallback
    if backend == "python":
        return _fallback
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel backend is not available")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")


def _as_f64(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3)")
    return out


def _as_c128(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.complex128)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3)")
    return out


def _check_bads(bads: np.ndarray, what: str) -> None:
    hit = bads[bads >= 0]
    if hit.size:
        raise CoincidentPointError(
            f"{what}: pair separation below {MIN_SEPARATION} wavelengths "
            f"(first offending index {int(hit[0])})"
        )


def lattice_green_sum(
    sites,
    k_par=(0.0, 0.0),
    k: float = 2.0 * np.pi,
    eta: float = 0.0,
    min_r: float = MIN_SEPARATION,
    threads: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Sum of G(0, r) * exp(-i k_par . r) [* exp(-eta |r|)] over site list.

    Returns the full 3x3 complex matrix.  Chunk partial sums are combined
    with np.sum so the result does not depend on the thread count.
    """
    impl = _get_impl(backend)
    sites = _as_f64(sites, "sites")
    kx, ky = float(k_par[0]), float(k_par[1])
    if impl is _fallback:
        partials, bads = impl.green_sum_sites(sites, kx, ky, float(k),
                                              float(eta), float(min_r))
    else:
        partials, bads = impl.green_sum_sites(sites, kx, ky, float(k),
                                              float(eta), float(min_r),
                                              resolve_threads(threads))
    _check_bads(bads, "lattice_green_sum")
    xx, yy, zz, xy, xz, yz = np.sum(partials, axis=0)
    return np.array(
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]], dtype=np.complex128
    )


def scattered_field_raw(
    points,
    positions,
    weights,
    k: float = 2.0 * np.pi,
    min_r: float = MIN_SEPARATION,
    threads: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """out[p] = sum_n G(points[p], positions[n]) @ weights[n]."""
    impl = _get_impl(backend)
    points = _as_f64(points, "points")
    positions = _as_f64(positions, "positions")
    weights = _as_c128(weights, "weights")
    if weights.shape[0] != positions.shape[0]:
        raise ValueError("weights and positions must have equal length")
    if impl is _fallback:
        out, bads = impl.scattered_sum(points, positions, weights, float(k),
                                       float(min_r))
    else:
        out, bads = impl.scattered_sum(points, positions, weights, float(k),
                                       float(min_r), resolve_threads(threads))
    _check_bads(bads, "scattered_field_raw")
    return out


def apply_interaction(
    positions,
    weights,
    k: float = 2.0 * np.pi,
    min_r: float = MIN_SEPARATION,
    threads: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """out[m] = sum_{n != m} G(r_m, r_n) @ weights[n] (self term excluded)."""
    impl = _get_impl(backend)
    positions = _as_f64(positions, "positions")
    weights = _as_c128(weights, "weights")
    if weights.shape[0] != positions.shape[0]:
        raise ValueError("weights and positions must have equal length")
    if impl is _fallback:
        out, bads = impl.interaction_matvec(positions, weights, float(k),
                                            float(min_r))
    else:
        out, bads = impl.interaction_matvec(positions, weights, float(k),
                                            float(min_r),
                                            resolve_threads(threads))
    _check_bads(bads, "apply_interaction")
    return out


def coupling_matrix(
    positions,
    couplings,
    k: float = 2.0 * np.pi,
    min_r: float = MIN_SEPARATION,
    threads: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Dense (3N, 3N) matrix with blocks M[m, n] = g_n G(r_m, r_n), n != m."""
    impl = _get_impl(backend)
    positions = _as_f64(positions, "positions")
    couplings = np.ascontiguousarray(couplings, dtype=np.complex128)
    if couplings.ndim != 1 or couplings.shape[0] != positions.shape[0]:
        raise ValueError("couplings must be a length-N vector")
    if impl is _fallback:
        mat, bads = impl.interaction_matrix(positions, couplings, float(k),
                                            float(min_r))
    else:
        mat, bads = impl.interaction_matrix(positions, couplings, float(k),
                                            float(min_r),
                                            resolve_threads(threads))
    _check_bads(bads, "coupling_matrix")
    return mat
