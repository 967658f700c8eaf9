"""Atom-array builders: stripe-patterned dual-species lattices, rectangular
single-species lattices, and pixel superarrays with isolation regions.

Conventions fixed here and relied on everywhere downstream:
  - atoms are ordered row-major bottom-up (y increasing, then x increasing),
  - arrays are centered on the origin in the z = 0 plane,
  - in a stripe array, even row index counted from the bottom is species A
    and stripes run along x; a swap flag flips the species assignment.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SpeciesParams
from .errors import ConfigError


@dataclass(frozen=True)
class AtomArray:
    """Ordered atom positions (N, 3) with parallel species labels (N,)."""

    positions: np.ndarray
    species: np.ndarray
    lattice_constant: float
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        spec = np.asarray(self.species)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ConfigError("positions must have shape (N, 3)")
        if spec.shape != (pos.shape[0],):
            raise ConfigError("species must be a length-N vector of labels")
        bad = set(np.unique(spec)) - {"A", "B"}
        if bad:
            raise ConfigError(f"unknown species labels: {sorted(bad)}")
        pos.setflags(write=False)
        spec.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "species", spec)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    def count(self, label: str) -> int:
        return int(np.count_nonzero(self.species == label))


def _centered_axis(n: int, a: float) -> np.ndarray:
    return (np.arange(n) - (n - 1) / 2.0) * a


def _grid_positions(n_x: int, n_y: int, a_x: float, a_y: float) -> np.ndarray:
    xs = _centered_axis(n_x, a_x)
    ys = _centered_axis(n_y, a_y)
    pos = np.zeros((n_y * n_x, 3))
    pos[:, 0] = np.tile(xs, n_y)
    pos[:, 1] = np.repeat(ys, n_x)
    return pos


def _check_dims(n_x: int, n_y: int, *spacings: float) -> None:
    if n_x < 1 or n_y < 1:
        raise ConfigError(f"array dimensions must be >= 1, got {n_x}x{n_y}")
    for a in spacings:
        if not (a > 0):
            raise ConfigError(f"lattice spacing must be positive, got {a!r}")


def build_stripe_array(n_x: int, n_y: int, a: float, swap: bool = False) -> AtomArray:
    """Square lattice with rows alternating species (stripes along x).

    Even row index from the bottom is species A (B when ``swap``), so each
    species forms a rectangular sublattice with periods (a, 2a).
    """
    _check_dims(n_x, n_y, a)
    pos = _grid_positions(n_x, n_y, a, a)
    row = np.repeat(np.arange(n_y), n_x)
    labels = ("A", "B") if not swap else ("B", "A")
    spec = np.where(row % 2 == 0, labels[0], labels[1])
    return AtomArray(pos, spec, a, {
        "builder": "stripe", "n_x": n_x, "n_y": n_y, "a": a, "swap": swap,
    })


def build_single_species_rectangle(
    n_x: int, n_y: int, a_x: float, a_y: float, species: str = "A"
) -> AtomArray:
    """Centered rectangular lattice of one species."""
    _check_dims(n_x, n_y, a_x, a_y)
    if species not in ("A", "B"):
        raise ConfigError(f"species must be 'A' or 'B', got {species!r}")
    pos = _grid_positions(n_x, n_y, a_x, a_y)
    spec = np.full(n_x * n_y, species)
    return AtomArray(pos, spec, a_x, {
        "builder": "rectangle", "n_x": n_x, "n_y": n_y,
        "a_x": a_x, "a_y": a_y, "species": species,
    })


@dataclass(frozen=True)
class PixelSpec:
    """One pixel: side length in sites, stripe orientation, species swap.

    ``orientation`` is the direction the stripes run, which is also the
    polarization the pixel is designed to transmit: "x" reproduces the
    stripe builder (rows of constant y alternate species), "y" is its
    transpose (columns of constant x alternate).
    """

    side: int
    orientation: str = "x"
    swap: bool = False

    def __post_init__(self) -> None:
        if self.side < 1:
            raise ConfigError(f"pixel side must be >= 1, got {self.side}")
        if self.orientation not in ("x", "y"):
            raise ConfigError(
                f"pixel orientation must be 'x' or 'y', got {self.orientation!r}"
            )


@dataclass(frozen=True)
class PixelLayout:
    """Grid of pixels (rows bottom-up) with isolation strips between them.

    ``pixels[i][j]`` is the pixel in the i-th row from the bottom and the
    j-th column from the left.  Isolation strips of ``isolation_width``
    sites separate adjacent pixels (no strip on the outer border); those
    sites are filled with ``fill_species``.
    """

    pixels: tuple
    isolation_width: int = 0
    fill_species: str = "A"

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.pixels)
        object.__setattr__(self, "pixels", rows)
        if not rows or not rows[0]:
            raise ConfigError("pixel grid must be non-empty")
        n_cols = len(rows[0])
        if any(len(row) != n_cols for row in rows):
            raise ConfigError("all pixel rows must have the same length")
        for row in rows:
            for p in row:
                if not isinstance(p, PixelSpec):
                    raise ConfigError("pixel grid entries must be PixelSpec")
        if self.isolation_width < 0:
            raise ConfigError("isolation width must be >= 0")
        if self.fill_species not in ("A", "B"):
            raise ConfigError(f"fill species must be 'A' or 'B'")
        # Pixel sides must be consistent per row and per column.
        for i, row in enumerate(rows):
            if len({p.side for p in row}) != 1:
                raise ConfigError(f"pixel row {i} mixes side lengths")
        for j in range(n_cols):
            if len({row[j].side for row in rows}) != 1:
                raise ConfigError(f"pixel column {j} mixes side lengths")

    @property
    def col_sides(self) -> tuple:
        return tuple(p.side for p in self.pixels[0])

    @property
    def row_sides(self) -> tuple:
        return tuple(row[0].side for row in self.pixels)

    @property
    def side_x(self) -> int:
        return sum(self.col_sides) + self.isolation_width * (len(self.col_sides) - 1)

    @property
    def side_y(self) -> int:
        return sum(self.row_sides) + self.isolation_width * (len(self.row_sides) - 1)


def _pixel_species(p: PixelSpec, local_row: np.ndarray, local_col: np.ndarray):
    parity = local_row % 2 if p.orientation == "x" else local_col % 2
    labels = ("A", "B") if not p.swap else ("B", "A")
    return np.where(parity == 0, labels[0], labels[1])


def build_pixel_superarray(layout: PixelLayout, a: float) -> AtomArray:
    """Global square lattice with per-pixel stripe patterns and isolation
    sites of the fill species between pixels."""
    if not (a > 0):
        raise ConfigError(f"lattice spacing must be positive, got {a!r}")
    n_x, n_y = layout.side_x, layout.side_y
    pos = _grid_positions(n_x, n_y, a, a)
    col = np.tile(np.arange(n_x), n_y)
    row = np.repeat(np.arange(n_y), n_x)
    spec = np.full(n_x * n_y, layout.fill_species)
    y0 = 0
    for prow in layout.pixels:
        x0 = 0
        h = prow[0].side
        for p in prow:
            inside = (
                (row >= y0) & (row < y0 + h) & (col >= x0) & (col < x0 + p.side)
            )
            spec[inside] = _pixel_species(p, row[inside] - y0, col[inside] - x0)
            x0 += p.side + layout.isolation_width
        y0 += h + layout.isolation_width
    return AtomArray(pos, spec, a, {
        "builder": "pixels",
        "pixel_sides": [list(layout.row_sides), list(layout.col_sides)],
        "isolation_width": layout.isolation_width,
        "a": a,
    })


def species_couplings(
    array: AtomArray, params_a: SpeciesParams, params_b: SpeciesParams
) -> np.ndarray:
    """Per-atom complex coupling g_n selected by species label."""
    out = np.empty(len(array), dtype=np.complex128)
    out[array.species == "A"] = params_a.coupling
    out[array.species == "B"] = params_b.coupling
    return out


def save_csv(array: AtomArray, path) -> None:
    """Write the array as CSV with columns x,y,z,species (lambda-units)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "species"])
        for p, s in zip(array.positions, array.species):
            writer.writerow([repr(float(p[0])), repr(float(p[1])),
                             repr(float(p[2])), s])


def load_csv(path, lattice_constant: float | None = None) -> AtomArray:
    """Read an array written by :func:`save_csv`."""
    path = Path(path)
    positions = []
    species = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:4]] != ["x", "y", "z", "species"]:
            raise ConfigError(f"{path}: expected header x,y,z,species")
        for row in reader:
            if not row:
                continue
            positions.append([float(row[0]), float(row[1]), float(row[2])])
            species.append(row[3].strip())
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    if lattice_constant is None:
        # Infer from the minimum pairwise gap along x within a row if
        # possible; fall back to the global minimum coordinate spacing.
        xs = np.unique(pos[:, 0])
        lattice_constant = float(np.min(np.diff(xs))) if xs.size > 1 else 1.0
    return AtomArray(pos, np.asarray(species), lattice_constant,
                     {"builder": "csv", "path": str(path)})
