"""One-dimensional shallow-water finite-volume solver.

Second-order central-upwind scheme with a well-balanced surface/depth
convex-combination reconstruction, gradient suppression near slow shocks
and wetting fronts, several comparison reconstructions, and a harness of
standard test problems.
"""

from .errors import (
    InsufficientDataError,
    InvalidStateError,
    NumericalFailureError,
)
from .mesh import (
    BedProfile,
    Grid,
    PhysParams,
    State,
    build_uniform_grid,
    init_cell_averages,
    l1_error,
)
from .reconstruction import Scheme, SchemeConfig, reconstruct
from .detectors import compute_detectors, swe_eigensystem
from .fluxes import assemble_rhs, central_upwind_flux, physical_flux
from .timestepping import (
    DRY_THRESHOLD,
    BoundaryKind,
    BoundarySpec,
    TimeControls,
    apply_boundaries,
    run,
    ssp_rk2_step,
    stable_dt,
)
from .problems import (
    CharacteristicInvariants,
    DamBreakDiagnostics,
    TestProblem,
    characteristic_invariants,
    dam_break_fronts,
    drain_reference,
    exact_solution,
    hugoniot_locus,
    oscillation_envelope,
    problem_ids,
    problem_setup,
    region_volume,
)

__all__ = [
    "BedProfile",
    "BoundaryKind",
    "BoundarySpec",
    "CharacteristicInvariants",
    "DRY_THRESHOLD",
    "DamBreakDiagnostics",
    "Grid",
    "InsufficientDataError",
    "InvalidStateError",
    "NumericalFailureError",
    "PhysParams",
    "Scheme",
    "SchemeConfig",
    "State",
    "TestProblem",
    "TimeControls",
    "apply_boundaries",
    "assemble_rhs",
    "build_uniform_grid",
    "central_upwind_flux",
    "characteristic_invariants",
    "compute_detectors",
    "dam_break_fronts",
    "drain_reference",
    "exact_solution",
    "hugoniot_locus",
    "init_cell_averages",
    "l1_error",
    "oscillation_envelope",
    "physical_flux",
    "problem_ids",
    "problem_setup",
    "reconstruct",
    "region_volume",
    "run",
    "ssp_rk2_step",
    "stable_dt",
    "swe_eigensystem",
]

__version__ = "0.1.0"
