"""Parameter scans: transmission vs lattice constant or detuning,
transmission-zero loci, and the power-law fit of the zero locus.

Sweeps re-derive the beam waist per sample (w0 = c_w sqrt(N) a, the beam
scales with the array) and persist rows incrementally so an interrupted
sweep resumes by skipping completed axis values.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .beam import GaussianBeam, named_polarization, waist_rule
from .core import GAMMA, SpeciesParams
from .errors import ConfigError, SolverError
from .geometry import build_stripe_array, species_couplings
from .observables import LensConfig, TransmissionResult, transmission
from .solver import CoupledSystem, SolverPolicy, solve

#: Far-detuned proxy for |delta_B| -> infinity; |coupling| < 3e-6 there.
FAR_DETUNED = 1e6

SWEEP_COLUMNS = ["axis", "T", "T_x", "T_y", "residual", "iterations", "seconds"]


@dataclass(frozen=True)
class SweepSpec:
    """Stripe-array transmission scan over lattice constant or detuning.

    ``axis`` is "a" (scan lattice constant at fixed detunings) or "delta"
    (scan the symmetric detuning at fixed ``fixed_a``).  The detuning rule
    is symmetric (delta_A = -delta_B = delta) when ``delta_b`` is None,
    otherwise both are fixed.
    """

    n_x: int = 26
    n_y: int = 26
    delta_a: float = 0.0
    delta_b: float | None = None
    gamma: float = GAMMA
    axis: str = "a"
    axis_values: tuple = ()
    fixed_a: float | None = None
    waist_coefficient: float = 0.3
    polarization: str = "diagonal"
    swap: bool = False
    allow_large_a: bool = False
    lens: LensConfig = field(default_factory=LensConfig)
    policy: SolverPolicy = field(default_factory=SolverPolicy)

    def __post_init__(self) -> None:
        if self.axis not in ("a", "delta"):
            raise ConfigError(f"axis must be 'a' or 'delta', got {self.axis!r}")
        vals = tuple(float(v) for v in self.axis_values)
        if not vals:
            raise ConfigError("axis_values must be non-empty")
        if self.axis == "a":
            if any(not (0.0 < v) for v in vals):
                raise ConfigError("lattice constants must be positive")
            if not self.allow_large_a and any(v >= 1.0 for v in vals):
                raise ConfigError(
                    "a-range extends to a >= 1 wavelength; diffraction "
                    "orders open there (set allow_large_a to override)"
                )
        if self.axis == "delta" and self.fixed_a is None:
            raise ConfigError("delta-axis sweeps need fixed_a")
        object.__setattr__(self, "axis_values", vals)

    def detunings(self, axis_value: float) -> tuple[float, float]:
        if self.axis == "delta":
            delta = axis_value
            return (delta, -delta) if self.delta_b is None else (delta, self.delta_b)
        if self.delta_b is None:
            return self.delta_a, -self.delta_a
        return self.delta_a, self.delta_b

    def lattice_constant(self, axis_value: float) -> float:
        return axis_value if self.axis == "a" else float(self.fixed_a)


def transmission_sample(spec: SweepSpec, axis_value: float):
    """One full build + solve + transmission at a single axis value;
    returns (TransmissionResult, DipoleSolution)."""
    a = spec.lattice_constant(axis_value)
    d_a, d_b = spec.detunings(axis_value)
    array = build_stripe_array(spec.n_x, spec.n_y, a, swap=spec.swap)
    couplings = species_couplings(
        array,
        SpeciesParams("A", d_a, spec.gamma),
        SpeciesParams("B", d_b, spec.gamma),
    )
    beam = GaussianBeam(
        waist=waist_rule(len(array), a, spec.waist_coefficient),
        polarization=named_polarization(spec.polarization),
    )
    system = CoupledSystem(array, couplings, policy=spec.policy)
    solution = solve(system, beam)
    result = transmission(solution, array, beam, spec.lens,
                          threads=spec.policy.threads)
    return result, solution


def _read_done(path) -> set:
    done = set()
    if path is None or not os.path.exists(path):
        return done
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_COLUMNS:
            raise ConfigError(f"{path}: existing file is not a sweep table")
        for row in reader:
            if row:
                done.add(row[0])
    return done


def run_sweep(spec: SweepSpec, out_path=None) -> list:
    """Rows (axis, T, T_x, T_y, residual, iterations, seconds) per sample.

    With ``out_path`` rows are appended and flushed as they complete;
    an existing file resumes the sweep (completed axis values skipped, their
    rows reloaded).  Per-sample solver failures are recorded as NaN rows and
    the sweep continues.
    """
    done = _read_done(out_path)
    rows = []
    writer = None
    fh = None
    try:
        if out_path is not None:
            exists = os.path.exists(out_path)
            fh = open(out_path, "a", newline="")
            writer = csv.writer(fh)
            if not exists:
                writer.writerow(SWEEP_COLUMNS)
                fh.flush()
        for value in spec.axis_values:
            key = repr(float(value))
            if key in done:
                continue
            start = time.perf_counter()
            try:
                result, solution = transmission_sample(spec, value)
                row = [
                    float(value), result.t, result.t_x, result.t_y,
                    solution.residual, solution.iterations,
                    time.perf_counter() - start,
                ]
            except SolverError:
                row = [
                    float(value), math.nan, math.nan, math.nan, math.nan, 0,
                    time.perf_counter() - start,
                ]
            rows.append(row)
            if writer is not None:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v
                                 for v in row])
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    if out_path is not None:
        return load_sweep_csv(out_path)
    return rows


def load_sweep_csv(path) -> list:
    """Sweep rows from disk, ordered by axis value."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_COLUMNS:
            raise ConfigError(f"{path}: not a sweep table")
        for row in reader:
            if row:
                rows.append([float(row[0]), float(row[1]), float(row[2]),
                             float(row[3]), float(row[4]), int(row[5]),
                             float(row[6])])
    rows.sort(key=lambda r: r[0])
    return rows


@dataclass(frozen=True)
class ZeroHit:
    """One transmission zero: refined location and depth."""

    a_star: float
    t_min: float
    branch: int


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_minimize(f, lo: float, hi: float, tol: float):
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    f_c, f_d = f(c), f(d)
    while hi - lo > tol:
        if f_c < f_d:
            hi, d, f_d = d, c, f_c
            c = hi - _INVPHI * (hi - lo)
            f_c = f(c)
        else:
            lo, c, f_c = c, d, f_d
            d = lo + _INVPHI * (hi - lo)
            f_d = f(d)
    mid = 0.5 * (lo + hi)
    return mid, f(mid)


def find_zeros(
    spec: SweepSpec,
    mu: str,
    a_start: float,
    a_stop: float,
    coarse_step: float = 0.01,
    threshold: float = 1e-3,
    refine_tol: float = 1e-3,
    fine_factor: int = 5,
) -> list:
    """Transmission zeros of T_mu(a) in [a_start, a_stop].

    Two-stage bracketing: a coarse scan (step <= 0.01 wavelengths) finds
    candidate local minima; each candidate neighborhood is re-scanned at
    coarse_step/fine_factor to catch dips narrower than the coarse grid;
    golden-section minimization then refines each bracket to ``refine_tol``.
    A minimum qualifies as a zero iff its T_mu < ``threshold``.  Returns
    ZeroHits ordered by location (branch ids in that order); an empty list
    is a valid outcome.
    """
    if mu not in ("x", "y"):
        raise ConfigError(f"polarization component must be 'x' or 'y', got {mu!r}")
    if coarse_step > 0.01 + 1e-12:
        raise ConfigError("coarse scan step must be <= 0.01 wavelengths")
    if not (0.0 < a_start < a_stop):
        raise ConfigError("need 0 < a_start < a_stop")
    cache: dict = {}

    def t_mu(a: float) -> float:
        a = float(a)
        if a not in cache:
            result, _ = transmission_sample(replace(spec, axis="a",
                                                     axis_values=(a,)), a)
            cache[a] = result.t_x if mu == "x" else result.t_y
        return cache[a]

    n_coarse = max(2, int(math.ceil((a_stop - a_start) / coarse_step)) + 1)
    grid = np.linspace(a_start, a_stop, n_coarse)
    values = [t_mu(a) for a in grid]
    candidates = [
        i for i in range(1, len(grid) - 1)
        if values[i] <= values[i - 1] and values[i] <= values[i + 1]
    ]
    hits = []
    for i in candidates:
        lo, hi = grid[i - 1], grid[i + 1]
        fine = np.linspace(lo, hi, 2 * fine_factor + 1)
        fine_vals = [t_mu(a) for a in fine]
        for j in range(1, len(fine) - 1):
            if fine_vals[j] <= fine_vals[j - 1] and fine_vals[j] <= fine_vals[j + 1]:
                a_star, t_min = _golden_minimize(
                    t_mu, fine[j - 1], fine[j + 1], refine_tol
                )
                if t_min < threshold:
                    hits.append((a_star, t_min))
    hits.sort()
    merged = []
    for a_star, t_min in hits:
        if merged and abs(a_star - merged[-1][0]) < 2 * refine_tol:
            if t_min < merged[-1][1]:
                merged[-1] = (a_star, t_min)
            continue
        merged.append((a_star, t_min))
    return [ZeroHit(a_star=a, t_min=t, branch=i)
            for i, (a, t) in enumerate(merged)]


def fit_power_law(points) -> tuple[float, float, float]:
    """(prefactor, exponent, rms residual) of a* = prefactor * delta^exponent.

    Least squares on (log delta, log a*); needs at least two positive
    points (two points fit the line exactly with zero residual).
    """
    pts = [(float(d), float(a)) for d, a in points]
    if len(pts) < 2:
        raise ConfigError("power-law fit needs at least two points")
    if any(d <= 0 or a <= 0 for d, a in pts):
        raise ConfigError("power-law fit needs positive data")
    log_d = np.log([d for d, _ in pts])
    log_a = np.log([a for _, a in pts])
    design = np.column_stack([np.ones_like(log_d), log_d])
    coeffs, *_ = np.linalg.lstsq(design, log_a, rcond=None)
    fitted = design @ coeffs
    rms = float(np.sqrt(np.mean((log_a - fitted) ** 2)))
    return float(np.exp(coeffs[0])), float(coeffs[1]), rms


def save_zero_locus_csv(path, rows) -> None:
    """Zero-locus CSV: delta, branch, a_star, T_min.

    ``rows`` iterates over (delta, ZeroHit) pairs.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "branch", "a_star", "T_min"])
        for delta, hit in rows:
            writer.writerow([repr(float(delta)), hit.branch,
                             repr(float(hit.a_star)), repr(float(hit.t_min))])


def save_fit_json(path, prefactor: float, exponent: float, rms: float) -> None:
    with open(path, "w") as fh:
        json.dump({"prefactor": prefactor, "exponent": exponent, "rms": rms},
                  fh, indent=2)
        fh.write("\n")
