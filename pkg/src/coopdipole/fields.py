"""Total field (incident + scattered) at off-atom points and planar grids.

At any point away from the atoms the field is

    E(r) = E_inc(r) + sum_n g_n G(r, r_n) E(r_n),

summed over ALL atoms (the self-exclusion applies only at atom sites).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import E0, K
from .errors import CoincidentPointError
from .geometry import AtomArray
from .solver import DipoleSolution

#: Evaluation points closer than this to any atom are rejected.
POINT_FLOOR = 1e-6


@dataclass(frozen=True)
class FieldGrid:
    """Uniform planar sampling of the total field at height z."""

    z: float
    x_range: tuple
    y_range: tuple
    n_x: int
    n_y: int
    values: np.ndarray  # (n_y, n_x, 3) complex, y rows bottom-up

    def __post_init__(self) -> None:
        if self.values.shape != (self.n_y, self.n_x, 3):
            raise ValueError("grid values must have shape (n_y, n_x, 3)")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.n_x)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_range[0], self.y_range[1], self.n_y)

    def intensity(self, e0: float = E0) -> np.ndarray:
        """Normalized transverse intensity (|Ex|^2 + |Ey|^2)/E0^2."""
        return (
            np.abs(self.values[..., 0]) ** 2 + np.abs(self.values[..., 1]) ** 2
        ) / e0**2


def total_field(
    solution: DipoleSolution,
    array: AtomArray,
    incident,
    points,
    threads: int | None = None,
) -> np.ndarray:
    """E(r) at one point (3,) or a batch (P, 3)."""
    pts = np.asarray(points, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    try:
        scattered = _kernels.scattered_field_raw(
            pts, array.positions, solution.source_weights, K,
            min_r=POINT_FLOOR, threads=threads,
        )
    except CoincidentPointError as exc:
        raise CoincidentPointError(
            f"field evaluation point within {POINT_FLOOR} wavelengths of an "
            f"atom ({exc})"
        ) from exc
    out = np.asarray(incident.field(pts), dtype=complex) + scattered
    return out[0] if scalar else out


def field_grid(
    solution: DipoleSolution,
    array: AtomArray,
    incident,
    z: float,
    x_range=(-10.0, 10.0),
    y_range=(-10.0, 10.0),
    n_x: int = 201,
    n_y: int = 201,
    threads: int | None = None,
) -> FieldGrid:
    """Total field sampled on a uniform n_y-by-n_x grid in the plane z."""
    if n_x < 1 or n_y < 1:
        raise ValueError("grid sizes must be >= 1")
    xs = np.linspace(x_range[0], x_range[1], n_x)
    ys = np.linspace(y_range[0], y_range[1], n_y)
    pts = np.zeros((n_y * n_x, 3))
    pts[:, 0] = np.tile(xs, n_y)
    pts[:, 1] = np.repeat(ys, n_x)
    pts[:, 2] = z
    values = total_field(solution, array, incident, pts, threads=threads)
    return FieldGrid(
        z=float(z),
        x_range=(float(x_range[0]), float(x_range[1])),
        y_range=(float(y_range[0]), float(y_range[1])),
        n_x=n_x,
        n_y=n_y,
        values=values.reshape(n_y, n_x, 3),
    )


def incident_only_grid(
    incident,
    z: float,
    x_range=(-10.0, 10.0),
    y_range=(-10.0, 10.0),
    n_x: int = 201,
    n_y: int = 201,
) -> FieldGrid:
    """Grid of the incident field alone (no atoms)."""
    xs = np.linspace(x_range[0], x_range[1], n_x)
    ys = np.linspace(y_range[0], y_range[1], n_y)
    pts = np.zeros((n_y * n_x, 3))
    pts[:, 0] = np.tile(xs, n_y)
    pts[:, 1] = np.repeat(ys, n_x)
    pts[:, 2] = z
    values = np.asarray(incident.field(pts), dtype=complex)
    return FieldGrid(
        z=float(z),
        x_range=(float(x_range[0]), float(x_range[1])),
        y_range=(float(y_range[0]), float(y_range[1])),
        n_x=n_x,
        n_y=n_y,
        values=values.reshape(n_y, n_x, 3),
    )


# Column order of the grid CSV; kept stable for external consumers.
GRID_COLUMNS = [
    "x", "y",
    "Ex_re", "Ex_im", "Ey_re", "Ey_im", "Ez_re", "Ez_im",
    "I",
]


def save_grid_csv(grid: FieldGrid, path, stokes: dict | None = None) -> None:
    """Rows ordered bottom-up then left-to-right (y outer, x inner).

    ``stokes``: optional mapping of extra column name -> (n_y, n_x) array
    appended after the standard columns (used for S0..S3, psi, chi).
    """
    intensity = grid.intensity()
    extra_names = list(stokes.keys()) if stokes else []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRID_COLUMNS + extra_names)
        xs, ys = grid.x, grid.y
        for iy in range(grid.n_y):
            for ix in range(grid.n_x):
                e = grid.values[iy, ix]
                row = [repr(float(xs[ix])), repr(float(ys[iy]))]
                row += [repr(float(v)) for c in e for v in (c.real, c.imag)]
                row.append(repr(float(intensity[iy, ix])))
                row += [repr(float(stokes[name][iy, ix])) for name in extra_names]
                writer.writerow(row)


def save_grid_json(grid: FieldGrid, path, normalization: float = E0) -> None:
    """Header sidecar: plane, ranges, sizes, normalization convention."""
    with open(path, "w") as fh:
        json.dump(
            {
                "z": grid.z,
                "x_range": list(grid.x_range),
                "y_range": list(grid.y_range),
                "n_x": grid.n_x,
                "n_y": grid.n_y,
                "normalization_E0": normalization,
                "intensity": "(|Ex|^2+|Ey|^2)/E0^2",
                "row_order": "y bottom-up, x left-to-right",
            },
            fh,
            indent=2,
        )
        fh.write("\n")
