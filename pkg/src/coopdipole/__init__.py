"""Coupled-dipole simulator for dual-species subwavelength atom arrays.

Natural units throughout: lengths in wavelengths (lambda = 1, k = 2 pi),
rates in single-atom linewidths (gamma = 1), fields in units of the peak
incident amplitude (E0 = 1), and epsilon_0 = 1.
"""

from ._kernels import BACKEND, available_backends
from .beam import (
    GaussianBeam,
    PlaneWave,
    circular_polarization,
    diagonal_polarization,
    linear_polarization,
    named_polarization,
    waist_rule,
)
from .core import (
    E0,
    GAMMA,
    K,
    LAMBDA,
    SpeciesParams,
    UnitSystem,
    coupling_from_detuning,
)
from .errors import (
    CoincidentPointError,
    ConfigError,
    CoopDipoleError,
    SolverConvergenceError,
    SolverError,
)
from .fields import FieldGrid, field_grid, save_grid_csv, total_field
from .geometry import (
    AtomArray,
    PixelLayout,
    PixelSpec,
    build_pixel_superarray,
    build_single_species_rectangle,
    build_stripe_array,
    species_couplings,
)
from .greens import green_apply, green_tensor
from .infinite import (
    CooperativeTensors,
    LatticeSpec,
    cooperative_tensors,
    crossing_finder,
    effective_polarizability,
    lattice_green_sum,
    stripe_transmission,
)
from .observables import (
    LensConfig,
    StokesState,
    TransmissionResult,
    grid_stokes,
    stokes,
    transmission,
)
from .solver import CoupledSystem, DipoleSolution, SolverPolicy, solve
from .sweep import SweepSpec, ZeroHit, find_zeros, fit_power_law, run_sweep

__version__ = "1.0.0"

__all__ = [
    "AtomArray",
    "BACKEND",
    "CoincidentPointError",
    "ConfigError",
    "CoopDipoleError",
    "CooperativeTensors",
    "CoupledSystem",
    "DipoleSolution",
    "E0",
    "FieldGrid",
    "GAMMA",
    "GaussianBeam",
    "K",
    "LAMBDA",
    "LatticeSpec",
    "LensConfig",
    "PixelLayout",
    "PixelSpec",
    "PlaneWave",
    "SolverConvergenceError",
    "SolverError",
    "SolverPolicy",
    "SpeciesParams",
    "StokesState",
    "SweepSpec",
    "TransmissionResult",
    "UnitSystem",
    "ZeroHit",
    "available_backends",
    "build_pixel_superarray",
    "build_single_species_rectangle",
    "build_stripe_array",
    "circular_polarization",
    "cooperative_tensors",
    "coupling_from_detuning",
    "crossing_finder",
    "diagonal_polarization",
    "effective_polarizability",
    "field_grid",
    "find_zeros",
    "fit_power_law",
    "green_apply",
    "green_tensor",
    "grid_stokes",
    "lattice_green_sum",
    "linear_polarization",
    "named_polarization",
    "run_sweep",
    "save_grid_csv",
    "solve",
    "species_couplings",
    "stokes",
    "total_field",
    "transmission",
    "waist_rule",
    "__version__",
]
