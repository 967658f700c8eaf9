"""Command-line front end: config ingestion, task dispatch, artifacts.

A run is described by one JSON file with sections for geometry, species,
beam, lens, solver, the task to execute, and the output directory.  The
config is schema-validated before any computation (unknown keys are
rejected with a JSON-pointer path), defaults are filled in, and the fully
resolved config is written next to the artifacts so every run can be
reproduced from its own output directory.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 I/O error.
"""

import argparse
import hashlib
import importlib.resources
import json
import math
import os
import sys
import time

import jsonschema
import numpy as np
import scipy

from . import __version__
from ._kernels import BACKEND, resolve_threads
from .beam import GaussianBeam, named_polarization, waist_rule
from .core import SpeciesParams
from .errors import ConfigError, CoopDipoleError, SolverError
from .fields import field_grid, save_grid_csv
from .geometry import (
    AtomArray,
    PixelLayout,
    PixelSpec,
    build_pixel_superarray,
    build_single_species_rectangle,
    build_stripe_array,
    load_csv,
    species_couplings,
)
from .infinite import LatticeSpec, cooperative_tensors, save_scan_csv
from .observables import LensConfig, grid_stokes, transmission
from .solver import (
    CoupledSystem,
    SolverPolicy,
    save_solution_csv,
    save_solution_json,
    solve,
)
from .sweep import (
    SweepSpec,
    find_zeros,
    fit_power_law,
    run_sweep,
    save_fit_json,
    save_zero_locus_csv,
)

TASKS = ("solve", "fieldmap", "transmit", "sweep", "zeros",
         "latticesum", "pixels-demo")

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_POSITIVE_INT = {"type": "integer", "minimum": 1}
_RANGE = {
    "type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2,
}
_VALUES = {"type": "array", "items": _NUMBER, "minItems": 1}

# Top-level shape.  The geometry and task sections are validated against
# kind-specific schemas in a second stage so that their allowed keys can
# differ per kind while unknown keys are still rejected precisely.
TOP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["species", "task"],
    "properties": {
        "description": {"type": "string"},
        "geometry": {"type": "object"},
        "species": {
            "type": "object",
            "additionalProperties": False,
            "required": ["delta_a"],
            "properties": {
                "delta_a": _NUMBER,
                "delta_b": _NUMBER,
                "gamma": _POSITIVE,
            },
        },
        "beam": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "waist": _POSITIVE,
                "waist_coefficient": _POSITIVE,
                "polarization": {
                    "enum": ["x", "y", "diagonal", "right", "left"],
                },
                "amplitude": _POSITIVE,
            },
        },
        "lens": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "z": _POSITIVE,
                "radius": _POSITIVE,
                "n_r": {"type": "integer", "minimum": 8},
                "n_theta": {"type": "integer", "minimum": 8},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["auto", "dense", "iterative"]},
                "tolerance": _POSITIVE,
                "max_iterations": _POSITIVE_INT,
                "memory_cap_gib": _POSITIVE,
                "threads": _POSITIVE_INT,
            },
        },
        "task": {"type": "object"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"directory": {"type": "string", "minLength": 1}},
        },
    },
}

GEOMETRY_SCHEMAS = {
    "stripe": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n_x", "n_y"],
        "properties": {
            "kind": {"const": "stripe"},
            "n_x": _POSITIVE_INT,
            "n_y": _POSITIVE_INT,
            "lattice_constant": _POSITIVE,
            "swap": {"type": "boolean"},
        },
    },
    "rectangle": {
        "type": "object",
        "additionalProperties": False,
        "required": ["n_x", "n_y", "a_x", "a_y"],
        "properties": {
            "kind": {"const": "rectangle"},
            "n_x": _POSITIVE_INT,
            "n_y": _POSITIVE_INT,
            "a_x": _POSITIVE,
            "a_y": _POSITIVE,
            "species": {"enum": ["A", "B"]},
        },
    },
    "pixels": {
        "type": "object",
        "additionalProperties": False,
        "required": ["pixel_side", "pixel_grid", "lattice_constant"],
        "properties": {
            "kind": {"const": "pixels"},
            "pixel_side": _POSITIVE_INT,
            "pixel_grid": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"enum": ["x", "y"]},
                },
            },
            "swap_grid": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "boolean"}},
            },
            "isolation_width": {"type": "integer", "minimum": 0},
            "fill_species": {"enum": ["A", "B"]},
            "lattice_constant": _POSITIVE,
        },
    },
    "csv": {
        "type": "object",
        "additionalProperties": False,
        "required": ["path"],
        "properties": {
            "kind": {"const": "csv"},
            "path": {"type": "string", "minLength": 1},
            "lattice_constant": _POSITIVE,
        },
    },
}

_GRID_KEYS = {
    "z": _NUMBER,
    "x_range": _RANGE,
    "y_range": _RANGE,
    "n_x": _POSITIVE_INT,
    "n_y": _POSITIVE_INT,
    "include_stokes": {"type": "boolean"},
}

TASK_SCHEMAS = {
    "solve": {
        "type": "object",
        "additionalProperties": False,
        "properties": {"kind": {"const": "solve"}},
    },
    "fieldmap": {
        "type": "object",
        "additionalProperties": False,
        "properties": {"kind": {"const": "fieldmap"}, **_GRID_KEYS},
    },
    "transmit": {
        "type": "object",
        "additionalProperties": False,
        "properties": {"kind": {"const": "transmit"}},
    },
    "sweep": {
        "type": "object",
        "additionalProperties": False,
        "required": ["axis"],
        "properties": {
            "kind": {"const": "sweep"},
            "axis": {"enum": ["a", "delta"]},
            "values": _VALUES,
            "start": _NUMBER,
            "stop": _NUMBER,
            "num": {"type": "integer", "minimum": 2},
            "fixed_a": _POSITIVE,
            "allow_large_a": {"type": "boolean"},
        },
    },
    "zeros": {
        "type": "object",
        "additionalProperties": False,
        "required": ["mu", "detunings", "a_start", "a_stop"],
        "properties": {
            "kind": {"const": "zeros"},
            "mu": {"enum": ["x", "y"]},
            "detunings": _VALUES,
            "a_start": _POSITIVE,
            "a_stop": _POSITIVE,
            "coarse_step": _POSITIVE,
            "threshold": _POSITIVE,
            "refine_tol": _POSITIVE,
            "fine_factor": _POSITIVE_INT,
            "fit": {"type": "boolean"},
        },
    },
    "latticesum": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "kind": {"const": "latticesum"},
            "values": _VALUES,
            "start": _NUMBER,
            "stop": _NUMBER,
            "num": {"type": "integer", "minimum": 2},
            "aspect": _POSITIVE,
            "m_max": {"type": "integer", "minimum": 25},
            "k_par": _RANGE,
            "convergence_check": {"type": "boolean"},
        },
    },
    "pixels-demo": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "kind": {"const": "pixels-demo"},
            "window": _POSITIVE,
            **_GRID_KEYS,
        },
    },
}

_SECTION_DEFAULTS = {
    "species": {"gamma": 1.0},
    "beam": {"polarization": "diagonal", "amplitude": 1.0},
    "lens": {"z": 150.0, "radius": 90.0, "n_r": 200, "n_theta": 256},
    "solver": {
        "method": "auto",
        "tolerance": 1e-10,
        "max_iterations": 2000,
        "memory_cap_gib": 8.0,
    },
    "output": {"directory": "out"},
}

_TASK_DEFAULTS = {
    "solve": {},
    "fieldmap": {
        "z": 14.0, "x_range": [-10.0, 10.0], "y_range": [-10.0, 10.0],
        "n_x": 201, "n_y": 201, "include_stokes": True,
    },
    "transmit": {},
    "sweep": {"allow_large_a": False},
    "zeros": {
        "coarse_step": 0.01, "threshold": 1e-3, "refine_tol": 1e-3,
        "fine_factor": 5, "fit": False,
    },
    "latticesum": {
        "aspect": 2.0, "m_max": 1000, "k_par": [0.0, 0.0],
        "convergence_check": True,
    },
    "pixels-demo": {
        "z": 14.0, "x_range": [-10.0, 10.0], "y_range": [-10.0, 10.0],
        "n_x": 201, "n_y": 201, "include_stokes": True, "window": 5.0,
    },
}


def _escape_token(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def _schema_error(err: jsonschema.ValidationError, prefix: str = "") -> ConfigError:
    """Translate a validation error into a ConfigError whose message
    carries the JSON-pointer path of the offending key."""
    tokens = [_escape_token(str(t)) for t in err.absolute_path]
    message = err.message
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extras = sorted(set(err.instance) - allowed)
        if extras:
            tokens.append(_escape_token(extras[0]))
            message = f"unknown key {extras[0]!r}"
    pointer = prefix + ("/" + "/".join(tokens) if tokens else "")
    return ConfigError(f"config error at {pointer or '/'}: {message}")


def _validate(instance, schema, prefix: str = "") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance),
                    key=lambda e: list(e.absolute_path))
    if errors:
        raise _schema_error(errors[0], prefix)


def _resolve_values(params: dict, pointer: str) -> list:
    """A scan axis is either an explicit "values" list or a linspace
    given as start/stop/num; normalize both to the explicit list."""
    has_values = "values" in params
    has_linspace = any(k in params for k in ("start", "stop", "num"))
    if has_values and has_linspace:
        raise ConfigError(
            f"config error at {pointer}: give either 'values' or "
            "'start'/'stop'/'num', not both"
        )
    if has_values:
        return [float(v) for v in params["values"]]
    if not all(k in params for k in ("start", "stop", "num")):
        raise ConfigError(
            f"config error at {pointer}: scan needs 'values' or all of "
            "'start', 'stop', 'num'"
        )
    return [float(v) for v in
            np.linspace(params["start"], params["stop"], params["num"])]


def parse_config(path) -> "RunConfig":
    """Load, validate, and default-fill a run configuration file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config error at /: top level must be an object")
    _validate(data, TOP_SCHEMA)

    task = dict(data["task"])
    if "kind" not in task:
        raise ConfigError("config error at /task/kind: task kind is required")
    task_kind = task["kind"]
    if task_kind not in TASK_SCHEMAS:
        raise ConfigError(
            f"config error at /task/kind: unknown task {task_kind!r} "
            f"(expected one of {sorted(TASK_SCHEMAS)})"
        )
    _validate(task, TASK_SCHEMAS[task_kind], "/task")
    for key, default in _TASK_DEFAULTS[task_kind].items():
        task.setdefault(key, default)
    if task_kind in ("sweep", "latticesum"):
        task["values"] = _resolve_values(task, "/task")
        for key in ("start", "stop", "num"):
            task.pop(key, None)
    if task_kind == "zeros" and not (task["a_start"] < task["a_stop"]):
        raise ConfigError(
            "config error at /task/a_start: need a_start < a_stop"
        )

    geometry = None
    if "geometry" in data:
        geometry = dict(data["geometry"])
        geo_kind = geometry.get("kind", "stripe")
        if geo_kind not in GEOMETRY_SCHEMAS:
            raise ConfigError(
                f"config error at /geometry/kind: unknown geometry kind "
                f"{geo_kind!r} (expected one of {sorted(GEOMETRY_SCHEMAS)})"
            )
        _validate(geometry, GEOMETRY_SCHEMAS[geo_kind], "/geometry")
        geometry["kind"] = geo_kind
        if geo_kind == "stripe":
            geometry.setdefault("swap", False)
        elif geo_kind == "rectangle":
            geometry.setdefault("species", "A")
        elif geo_kind == "pixels":
            geometry.setdefault("isolation_width", 0)
            geometry.setdefault("fill_species", "A")
            grid = geometry["pixel_grid"]
            if len({len(row) for row in grid}) != 1:
                raise ConfigError(
                    "config error at /geometry/pixel_grid: rows must all "
                    "have the same length"
                )
            swap = geometry.setdefault(
                "swap_grid", [[False] * len(grid[0]) for _ in grid]
            )
            if [len(r) for r in swap] != [len(r) for r in grid]:
                raise ConfigError(
                    "config error at /geometry/swap_grid: shape must match "
                    "pixel_grid"
                )
    elif task_kind != "latticesum":
        raise ConfigError(
            "config error at /geometry: section is required for every task "
            "except latticesum"
        )

    resolved = {}
    if "description" in data:
        resolved["description"] = data["description"]
    if geometry is not None:
        resolved["geometry"] = geometry
    for section, defaults in _SECTION_DEFAULTS.items():
        merged = dict(defaults)
        merged.update(data.get(section, {}))
        resolved[section] = merged
    resolved["task"] = task
    species = resolved["species"]
    species.setdefault("delta_b", -float(species["delta_a"]))
    beam = resolved["beam"]
    if "waist" in beam and "waist_coefficient" in beam:
        raise ConfigError(
            "config error at /beam: give either 'waist' or "
            "'waist_coefficient', not both"
        )
    if "waist" not in beam:
        beam.setdefault("waist_coefficient", 0.3)

    return RunConfig(resolved=resolved, source_bytes=raw)


class RunConfig:
    """A validated, fully-defaulted run description."""

    def __init__(self, resolved: dict, source_bytes: bytes):
        self.resolved = resolved
        self.source_bytes = source_bytes

    @property
    def task_kind(self) -> str:
        return self.resolved["task"]["kind"]

    def build_array(self) -> AtomArray:
        geo = self.resolved["geometry"]
        kind = geo["kind"]
        if kind == "stripe":
            a = self._require_lattice_constant()
            return build_stripe_array(geo["n_x"], geo["n_y"], a,
                                      swap=geo["swap"])
        if kind == "rectangle":
            return build_single_species_rectangle(
                geo["n_x"], geo["n_y"], geo["a_x"], geo["a_y"],
                species=geo["species"],
            )
        if kind == "pixels":
            layout = PixelLayout(
                pixels=tuple(
                    tuple(
                        PixelSpec(geo["pixel_side"], orientation, swap)
                        for orientation, swap in zip(grid_row, swap_row)
                    )
                    for grid_row, swap_row in zip(geo["pixel_grid"],
                                                  geo["swap_grid"])
                ),
                isolation_width=geo["isolation_width"],
                fill_species=geo["fill_species"],
            )
            return build_pixel_superarray(layout, geo["lattice_constant"])
        return load_csv(geo["path"], geo.get("lattice_constant"))

    def _require_lattice_constant(self) -> float:
        geo = self.resolved["geometry"]
        if "lattice_constant" not in geo:
            raise ConfigError(
                "config error at /geometry/lattice_constant: required for "
                f"task {self.task_kind!r}"
            )
        return float(geo["lattice_constant"])

    def species_params(self) -> tuple[SpeciesParams, SpeciesParams]:
        sp = self.resolved["species"]
        return (
            SpeciesParams("A", float(sp["delta_a"]), float(sp["gamma"])),
            SpeciesParams("B", float(sp["delta_b"]), float(sp["gamma"])),
        )

    def beam_for(self, array: AtomArray, a: float) -> GaussianBeam:
        bm = self.resolved["beam"]
        if "waist" in bm:
            waist = float(bm["waist"])
        else:
            waist = waist_rule(len(array), a, bm["waist_coefficient"])
        return GaussianBeam(
            waist=waist,
            polarization=named_polarization(bm["polarization"]),
            amplitude=float(bm["amplitude"]),
        )

    def lens(self) -> LensConfig:
        ln = self.resolved["lens"]
        return LensConfig(z=ln["z"], radius=ln["radius"],
                          n_r=ln["n_r"], n_theta=ln["n_theta"])

    def policy(self, threads: int | None = None) -> SolverPolicy:
        sv = self.resolved["solver"]
        if threads is None:
            threads = sv.get("threads")
        return SolverPolicy(
            method=sv["method"],
            tol=float(sv["tolerance"]),
            max_iter=int(sv["max_iterations"]),
            memory_cap_bytes=int(sv["memory_cap_gib"] * 1024**3),
            threads=threads,
        )


def _solve_once(config: RunConfig, threads: int | None):
    """Shared build + solve path for the single-geometry tasks."""
    array = config.build_array()
    params_a, params_b = config.species_params()
    couplings = species_couplings(array, params_a, params_b)
    beam = config.beam_for(array, array.lattice_constant)
    system = CoupledSystem(array, couplings, policy=config.policy(threads))
    solution = solve(system, beam)
    return array, beam, solution


def _task_solve(config, out_dir, threads):
    array, _, solution = _solve_once(config, threads)
    save_solution_csv(solution, array, os.path.join(out_dir, "solution.csv"))
    save_solution_json(solution, os.path.join(out_dir, "solution.json"))
    return ["solution.csv", "solution.json"]


def _task_fieldmap(config, out_dir, threads):
    array, beam, solution = _solve_once(config, threads)
    task = config.resolved["task"]
    grid = field_grid(
        solution, array, beam, z=task["z"],
        x_range=tuple(task["x_range"]), y_range=tuple(task["y_range"]),
        n_x=task["n_x"], n_y=task["n_y"], threads=threads,
    )
    stokes = grid_stokes(grid.values) if task["include_stokes"] else None
    save_grid_csv(grid, os.path.join(out_dir, "grid.csv"), stokes)
    save_solution_json(solution, os.path.join(out_dir, "solution.json"))
    return ["grid.csv", "solution.json"]


def _task_transmit(config, out_dir, threads):
    array, beam, solution = _solve_once(config, threads)
    result = transmission(solution, array, beam, config.lens(),
                          threads=threads)
    result.save_json(os.path.join(out_dir, "transmission.json"))
    save_solution_json(solution, os.path.join(out_dir, "solution.json"))
    return ["transmission.json", "solution.json"]


def _sweep_spec(config: RunConfig, threads: int | None) -> SweepSpec:
    geo = config.resolved["geometry"]
    if geo["kind"] != "stripe":
        raise ConfigError(
            "config error at /geometry/kind: sweep and zeros tasks need "
            "stripe geometry"
        )
    bm = config.resolved["beam"]
    if "waist" in bm:
        raise ConfigError(
            "config error at /beam/waist: sweeps rescale the waist with "
            "the lattice constant; use waist_coefficient"
        )
    sp = config.resolved["species"]
    task = config.resolved["task"]
    fixed_a = task.get("fixed_a", geo.get("lattice_constant"))
    delta_b = sp["delta_b"]
    if delta_b == -float(sp["delta_a"]):
        delta_b = None  # symmetric rule tracks the scanned detuning
    return SweepSpec(
        n_x=geo["n_x"], n_y=geo["n_y"],
        delta_a=float(sp["delta_a"]), delta_b=delta_b,
        gamma=float(sp["gamma"]),
        axis=task.get("axis", "a"),
        axis_values=tuple(task.get("values") or (task.get("a_start", 0.2),)),
        fixed_a=fixed_a,
        waist_coefficient=bm["waist_coefficient"],
        polarization=bm["polarization"],
        swap=geo["swap"],
        allow_large_a=task.get("allow_large_a", False),
        lens=config.lens(),
        policy=config.policy(threads),
    )


def _task_sweep(config, out_dir, threads):
    spec = _sweep_spec(config, threads)
    run_sweep(spec, os.path.join(out_dir, "sweep.csv"))
    return ["sweep.csv"]


def _task_zeros(config, out_dir, threads):
    from dataclasses import replace

    task = config.resolved["task"]
    base = _sweep_spec(config, threads)
    rows = []
    locus = []
    for delta in task["detunings"]:
        spec = replace(base, delta_a=float(delta), delta_b=None,
                       axis="a", axis_values=(task["a_start"],))
        hits = find_zeros(
            spec, task["mu"], task["a_start"], task["a_stop"],
            coarse_step=task["coarse_step"], threshold=task["threshold"],
            refine_tol=task["refine_tol"], fine_factor=task["fine_factor"],
        )
        for hit in hits:
            rows.append((delta, hit))
        if hits:
            locus.append((float(delta), hits[0].a_star))
    save_zero_locus_csv(os.path.join(out_dir, "zeros.csv"), rows)
    artifacts = ["zeros.csv"]
    if task["fit"]:
        if len(locus) < 2:
            raise SolverError(
                "power-law fit requested but fewer than two detunings "
                "produced a transmission zero"
            )
        prefactor, exponent, rms = fit_power_law(locus)
        save_fit_json(os.path.join(out_dir, "fit.json"),
                      prefactor, exponent, rms)
        artifacts.append("fit.json")
    return artifacts


def _task_latticesum(config, out_dir, threads):
    task = config.resolved["task"]
    gamma = float(config.resolved["species"]["gamma"])
    rows = []
    for a in task["values"]:
        spec = LatticeSpec(a_x=float(a), a_y=task["aspect"] * float(a),
                           m_max=task["m_max"])
        tensors = cooperative_tensors(
            spec, k_par=tuple(task["k_par"]), gamma_s=gamma,
            convergence_check=task["convergence_check"], threads=threads,
        )
        rows.append((float(a), tensors))
    save_scan_csv(os.path.join(out_dir, "latticesum.csv"), rows)
    return ["latticesum.csv"]


def _pixel_windows(config: RunConfig, grid, window: float) -> list[dict]:
    """Mean Stokes orientation in a centered window over each pixel."""
    geo = config.resolved["geometry"]
    a = float(geo["lattice_constant"])
    side = geo["pixel_side"]
    iso = geo["isolation_width"]
    pitch = (side + iso) * a
    n_rows = len(geo["pixel_grid"])
    n_cols = len(geo["pixel_grid"][0])
    st = grid_stokes(grid.values)
    xs, ys = grid.x, grid.y
    half = window / 2.0
    out = []
    for i in range(n_rows):
        cy = (i - (n_rows - 1) / 2.0) * pitch
        for j in range(n_cols):
            cx = (j - (n_cols - 1) / 2.0) * pitch
            sel_x = np.abs(xs - cx) <= half
            sel_y = np.abs(ys - cy) <= half
            psi = st["psi"][np.ix_(sel_y, sel_x)]
            s0 = st["S0"][np.ix_(sel_y, sel_x)]
            # Power-weighted mean orientation on the doubled angle, so
            # psi = +89 deg and -89 deg average to 90, not 0.
            weight = np.where(np.isfinite(psi), s0, 0.0)
            angle = np.where(np.isfinite(psi), 2.0 * psi, 0.0)
            c = float(np.sum(weight * np.cos(angle)))
            s = float(np.sum(weight * np.sin(angle)))
            mean_psi = 0.5 * math.atan2(s, c)
            out.append({
                "row": i,
                "col": j,
                "orientation": geo["pixel_grid"][i][j],
                "center_x": cx,
                "center_y": cy,
                "window": window,
                "mean_psi_deg": math.degrees(mean_psi),
                "mean_intensity": float(np.mean(s0)) / 2.0,
            })
    return out


def _task_pixels_demo(config, out_dir, threads):
    if config.resolved["geometry"]["kind"] != "pixels":
        raise ConfigError(
            "config error at /geometry/kind: pixels-demo needs pixels "
            "geometry"
        )
    array, beam, solution = _solve_once(config, threads)
    task = config.resolved["task"]
    grid = field_grid(
        solution, array, beam, z=task["z"],
        x_range=tuple(task["x_range"]), y_range=tuple(task["y_range"]),
        n_x=task["n_x"], n_y=task["n_y"], threads=threads,
    )
    stokes = grid_stokes(grid.values) if task["include_stokes"] else None
    save_grid_csv(grid, os.path.join(out_dir, "grid.csv"), stokes)
    save_solution_json(solution, os.path.join(out_dir, "solution.json"))
    windows = _pixel_windows(config, grid, task["window"])
    with open(os.path.join(out_dir, "pixel_windows.json"), "w") as fh:
        json.dump(windows, fh, indent=2)
        fh.write("\n")
    return ["grid.csv", "solution.json", "pixel_windows.json"]


_TASK_RUNNERS = {
    "solve": _task_solve,
    "fieldmap": _task_fieldmap,
    "transmit": _task_transmit,
    "sweep": _task_sweep,
    "zeros": _task_zeros,
    "latticesum": _task_latticesum,
    "pixels-demo": _task_pixels_demo,
}


def run(config: RunConfig, out_dir=None, threads: int | None = None) -> str:
    """Execute the configured task; returns the output directory.

    Writes the task artifacts plus resolved_config.json (re-running it
    reproduces the same numeric artifacts) and manifest.json (input hash,
    package versions, timings).
    """
    out = out_dir or config.resolved["output"]["directory"]
    os.makedirs(out, exist_ok=True)
    resolved = dict(config.resolved)
    if out_dir is not None:
        resolved["output"] = {"directory": str(out_dir)}
    with open(os.path.join(out, "resolved_config.json"), "w") as fh:
        json.dump(resolved, fh, indent=2)
        fh.write("\n")

    start = time.perf_counter()
    artifacts = _TASK_RUNNERS[config.task_kind](config, out, threads)
    elapsed = time.perf_counter() - start

    manifest = {
        "task": config.task_kind,
        "input_sha256": hashlib.sha256(config.source_bytes).hexdigest(),
        "versions": {
            "coopdipole": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "backend": BACKEND,
        "threads": resolve_threads(threads
                                   or config.resolved["solver"].get("threads")),
        "timings_s": {"task": elapsed},
        "artifacts": ["resolved_config.json"] + artifacts + ["manifest.json"],
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return out


def _presets_dir():
    return importlib.resources.files("coopdipole") / "presets"


def _preset_names() -> list[str]:
    return sorted(
        p.name[:-5] for p in _presets_dir().iterdir()
        if p.name.endswith(".json")
    )


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    out = run(config, out_dir=args.out, threads=args.threads)
    print(f"task {config.task_kind} done; artifacts in {out}")
    return 0


def _cmd_validate(args) -> int:
    config = parse_config(args.config)
    print(f"{args.config}: valid ({config.task_kind} task)")
    return 0


def _cmd_presets(args) -> int:
    names = _preset_names()
    if args.action == "list":
        for name in names:
            text = (_presets_dir() / f"{name}.json").read_text()
            description = json.loads(text).get("description", "")
            print(f"{name:16s} {description}")
        return 0
    if args.name not in names:
        raise ConfigError(
            f"unknown preset {args.name!r}; available: {', '.join(names)}"
        )
    target = args.dest or f"{args.name}.json"
    text = (_presets_dir() / f"{args.name}.json").read_text()
    with open(target, "w") as fh:
        fh.write(text)
    print(f"copied preset {args.name} to {target}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopdipole",
        description="Coupled-dipole simulations of dual-species atom arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config file")
    p_run.add_argument("config", help="path to a JSON run config")
    p_run.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (overrides config and "
                            "COOPDIPOLE_THREADS)")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="path to a JSON run config")
    p_val.set_defaults(func=_cmd_validate)

    p_pre = sub.add_parser("presets", help="list or copy bundled presets")
    pre_sub = p_pre.add_subparsers(dest="action", required=True)
    pre_sub.add_parser("list", help="list bundled presets")
    p_copy = pre_sub.add_parser("copy", help="copy a preset to a file")
    p_copy.add_argument("name", help="preset name (see presets list)")
    p_copy.add_argument("dest", nargs="?", default=None,
                        help="destination path (default <name>.json)")
    p_pre.set_defaults(func=_cmd_presets)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except CoopDipoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
