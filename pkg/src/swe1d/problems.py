"""Test problems: setups, exact solutions, and diagnostic measures.

Five configurations exercise the solver: a lake at rest over a bumpy bed,
a draining basin with a thin residual film, an oscillating planar lens in
a parabolic basin, a slowly drifting shock on a flat bed, and a dam break
onto a dry bed.  All of them use g = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidStateError
from .mesh import (
    BedProfile,
    Grid,
    PhysParams,
    State,
    build_uniform_grid,
    init_cell_averages,
    region_mask,
)
from .timestepping import DRY_THRESHOLD, BoundaryKind, BoundarySpec

# Slow-shock states in the co-moving frame (depth, velocity); the frame
# itself drifts at +0.1 so the shock creeps left at 0.1 in simulation
# coordinates.
_SHOCK_FRAME_VELOCITY = 0.1
_SHOCK_H_AHEAD = 0.1
_SHOCK_H_BEHIND = 1.0
_SHOCK_U_AHEAD = 2.3452 - _SHOCK_FRAME_VELOCITY
_SHOCK_U_BEHIND = 0.2345 - _SHOCK_FRAME_VELOCITY
_SHOCK_X0 = 0.1


@dataclass(frozen=True)
class TestProblem:
    """Static description of one test configuration."""

    problem_id: str
    x_left: float
    x_right: float
    t_start: float
    t_end_default: float
    boundaries: BoundarySpec
    frame_velocity: float
    has_exact: bool
    default_snapshots: tuple[float, ...] = ()


@dataclass(frozen=True)
class DrainReference:
    """Asymptotic facts for the draining basin.

    The thin film over the submerged bump drains like independent parcels
    sliding in the outer x**2 bowl, so a parcel released at rest from x0
    follows x0*cos(sqrt(2)*t) until it meets the interior contact.
    """

    t_parcel_to_unit: float
    t_outer_dry: float
    log10_decay_rate: float

    @staticmethod
    def parcel_position(x0: float, t: float) -> float:
        return x0 * math.cos(math.sqrt(2.0) * t)


@dataclass(frozen=True)
class DamBreakDiagnostics:
    """Front positions and bore estimates measured from a numerical state."""

    x_f1: float
    x_f2: float
    u_max: float
    x_f: float
    c_m: float
    h_r: float
    x_st: float


@dataclass(frozen=True)
class CharacteristicInvariants:
    """Per-cell Riemann invariants and related fields, NaN where dry.

    Velocities are shifted back to the lab frame before anything is
    formed, so invariants from a drifting-frame run plot on the same
    axes as the stationary exact solution.
    """

    c_minus: np.ndarray
    c_plus: np.ndarray
    energy: np.ndarray
    froude: np.ndarray


@dataclass(frozen=True)
class HugoniotLocus:
    """One-parameter family of states joined to a reference by a jump."""

    h: np.ndarray
    u: np.ndarray
    c_minus: np.ndarray
    c_plus: np.ndarray


def bumpy_bed(x: np.ndarray) -> np.ndarray:
    """Bed for the lake and drain problems: central bump inside a bowl."""
    x = np.asarray(x, dtype=float)
    return np.abs(x * x - 1.0 / 3.0) + 1.0 / 3.0


def parabolic_bed(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x * x - 1.0


def flat_bed(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


_WALLS = BoundarySpec(BoundaryKind.WALL_ZERO_VELOCITY,
                      BoundaryKind.WALL_ZERO_VELOCITY)
_OPEN = BoundarySpec(BoundaryKind.EXTRAPOLATE, BoundaryKind.EXTRAPOLATE)


def _shock_snapshots() -> tuple[float, ...]:
    # Hundredth-of-a-unit cadence across the whole run; rounding keeps the
    # times exactly representable in output filenames.
    return tuple(np.round(np.linspace(-1.0, 1.0, 201), 2))


_PROBLEMS: dict[str, TestProblem] = {
    "lake-at-rest": TestProblem(
        "lake-at-rest", -2.0, 2.0, 0.0, 100.0, _WALLS, 0.0, True),
    "basin-drain": TestProblem(
        "basin-drain", -2.0, 2.0, 0.0, 8.0, _WALLS, 0.0, False),
    "thacker": TestProblem(
        "thacker", -2.0, 2.0, 0.0, math.sqrt(2.0) * math.pi, _WALLS,
        0.0, True),
    "slow-shock": TestProblem(
        "slow-shock", -10.0, 10.0, -1.0, 1.0, _OPEN,
        _SHOCK_FRAME_VELOCITY, True, _shock_snapshots()),
    "dam-break": TestProblem(
        "dam-break", 0.0, 4.0, 0.0, 1.0, _WALLS, 0.0, True),
}


def problem_ids() -> tuple[str, ...]:
    return tuple(_PROBLEMS)


def get_problem(problem_id: str) -> TestProblem:
    try:
        return _PROBLEMS[problem_id]
    except KeyError:
        raise ValueError(f"unknown problem id: {problem_id!r}") from None


def _piecewise_constant_averages(grid: Grid, x_jump: float,
                                 left: float, right: float) -> np.ndarray:
    """Exact cell averages of a step function, splitting the straddle cell."""
    xl = grid.x_interface[:-1]
    frac = np.clip((x_jump - xl) / grid.dx, 0.0, 1.0)
    return left * frac + right * (1.0 - frac)


def problem_setup(problem_id: str, n_cells: int,
                  phys: PhysParams | None = None
                  ) -> tuple[TestProblem, Grid, BedProfile, State]:
    """Build the grid, bed, and initial cell averages for one problem.

    The lake and drain start from the discrete equilibrium of their own
    bed discretisation (flat surface measured against cell-center bed
    values), so a well-balanced scheme holds them still to rounding.
    """
    problem = get_problem(problem_id)
    grid = build_uniform_grid(n_cells, problem.x_left, problem.x_right,
                              frame_velocity=problem.frame_velocity)

    if problem_id in ("lake-at-rest", "basin-drain"):
        bed = BedProfile(bumpy_bed(grid.x_interface))
        h = 1.0 - bed.b_center
        if problem_id == "lake-at-rest":
            h = np.maximum(h, 0.0)
        else:
            h = np.maximum(h, 1.0e-3)
        q = np.zeros_like(h)
    elif problem_id == "thacker":
        bed = BedProfile(parabolic_bed(grid.x_interface))
        h = init_cell_averages(
            lambda x: np.maximum(0.0, 1.0 - (x - 1.0) ** 2), grid)
        q = np.zeros_like(h)
    elif problem_id == "slow-shock":
        bed = BedProfile(flat_bed(grid.x_interface))
        h = _piecewise_constant_averages(grid, _SHOCK_X0,
                                         _SHOCK_H_AHEAD, _SHOCK_H_BEHIND)
        q = _piecewise_constant_averages(
            grid, _SHOCK_X0,
            _SHOCK_H_AHEAD * _SHOCK_U_AHEAD,
            _SHOCK_H_BEHIND * _SHOCK_U_BEHIND)
    else:
        bed = BedProfile(flat_bed(grid.x_interface))
        h = _piecewise_constant_averages(grid, 1.0, 1.0, 0.0)
        q = np.zeros_like(h)

    state = State(h=h, q=q, t=problem.t_start)
    return problem, grid, bed, state


def exact_solution(problem_id: str, x: np.ndarray, t: float
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise exact (h, u) at simulation time t; u is NaN on dry points.

    Velocities are in the simulation frame of the problem.  The draining
    basin has no closed-form solution and raises.
    """
    problem = get_problem(problem_id)
    if not problem.has_exact:
        raise NotImplementedError(
            f"no exact solution for {problem_id!r}")
    x = np.asarray(x, dtype=float)

    if problem_id == "lake-at-rest":
        h = np.maximum(0.0, 1.0 - bumpy_bed(x))
        u = np.where(h > 0.0, 0.0, np.nan)
        return h, u

    if problem_id == "thacker":
        root2 = math.sqrt(2.0)
        s = math.cos(root2 * t)
        u_wet = -root2 * math.sin(root2 * t)
        h = np.maximum(0.0, 1.0 - (x - s) ** 2)
        u = np.where(h > 0.0, u_wet, np.nan)
        return h, u

    if problem_id == "slow-shock":
        x_s = -_SHOCK_FRAME_VELOCITY * t
        ahead = x < x_s
        h = np.where(ahead, _SHOCK_H_AHEAD, _SHOCK_H_BEHIND)
        u = np.where(ahead, _SHOCK_U_AHEAD, _SHOCK_U_BEHIND)
        return h, u

    # Dam break onto a dry bed: still water left of the fan, a similarity
    # fan between the backward wave and the front, dry beyond.
    if t <= 0.0:
        h = np.where(x <= 1.0, 1.0, 0.0)
        u = np.where(h > 0.0, 0.0, np.nan)
        return h, u
    xi = (x - 1.0) / t
    h = np.zeros_like(x)
    u = np.full_like(x, np.nan)
    still = xi <= -1.0
    fan = (xi > -1.0) & (xi < 2.0)
    h[still] = 1.0
    u[still] = 0.0
    h[fan] = (2.0 / 3.0 - xi[fan] / 3.0) ** 2
    u[fan] = 2.0 / 3.0 + 2.0 * xi[fan] / 3.0
    return h, u


def drain_reference() -> DrainReference:
    root2 = math.sqrt(2.0)
    return DrainReference(
        t_parcel_to_unit=math.acos(0.5) / root2,
        t_outer_dry=math.acos(0.6) / root2,
        log10_decay_rate=-3.0 / 8.0,
    )


def region_volume(state: State, grid: Grid, region) -> float:
    """Water volume (integral of h) over a subset of cells."""
    mask = region_mask(grid, region)
    return float(np.sum(state.h[mask] * grid.dx[mask]))


def dam_break_fronts(state: State, grid: Grid,
                     phys: PhysParams | None = None) -> DamBreakDiagnostics:
    """Front positions and bore estimates for the dam-break state.

    x_f1 is the center of the cell with the largest velocity among wet
    cells; x_f2 the center of the last wet cell.  The one-sided bore
    estimates treat the flow at x_f1 as if a downstream layer capped the
    fan there: c_m is the fan sound speed at that point, h_r = c_m**4/8
    the depth such a layer would have, and x_st the shock position it
    would put the bore at.
    """
    g = (phys or PhysParams()).g
    t = state.t
    if t <= 0.0:
        raise ValueError("front diagnostics need t > 0")
    wet = state.h > DRY_THRESHOLD
    if not wet.any():
        raise InvalidStateError("state is completely dry")
    u = np.zeros_like(state.h)
    u[wet] = state.q[wet] / state.h[wet]
    idx_wet = np.flatnonzero(wet)
    i1 = idx_wet[np.argmax(u[idx_wet])]
    x_f1 = float(grid.x_center[i1])
    x_f2 = float(grid.x_center[idx_wet[-1]])
    c_m = 2.0 / 3.0 - (x_f1 - 1.0) / (3.0 * t)
    return DamBreakDiagnostics(
        x_f1=x_f1,
        x_f2=x_f2,
        u_max=float(u[i1]),
        x_f=1.0 + 2.0 * math.sqrt(g) * t,
        c_m=c_m,
        h_r=c_m ** 4 / 8.0,
        x_st=1.0 + t * (2.0 - 3.0 * c_m),
    )


def hugoniot_locus(h_ref: float, u_ref: float, h: np.ndarray,
                   g: float = 1.0) -> HugoniotLocus:
    """States reachable from (h_ref, u_ref) across a single jump.

    Parameterised by depth; the branch chosen is the one through the
    slow-shock pair, with u decreasing as h grows.  Returned invariants
    use the same frame as u_ref.
    """
    h = np.asarray(h, dtype=float)
    if h_ref <= 0.0 or np.any(h <= 0.0):
        raise InvalidStateError("locus needs strictly positive depths")
    u = u_ref - (h - h_ref) * np.sqrt(g * (h + h_ref) / (2.0 * h * h_ref))
    c = np.sqrt(g * h)
    return HugoniotLocus(h=h, u=u, c_minus=u - 2.0 * c, c_plus=u + 2.0 * c)


def characteristic_invariants(state: State, grid: Grid, bed: BedProfile,
                              phys: PhysParams | None = None
                              ) -> CharacteristicInvariants:
    g = (phys or PhysParams()).g
    wet = state.h > DRY_THRESHOLD
    h = state.h
    u_lab = np.full_like(h, np.nan)
    u_lab[wet] = state.q[wet] / h[wet] + grid.frame_velocity
    c = np.sqrt(g * np.where(wet, h, np.nan))
    eta = h + bed.b_center
    return CharacteristicInvariants(
        c_minus=u_lab - 2.0 * c,
        c_plus=u_lab + 2.0 * c,
        energy=0.5 * u_lab ** 2 + g * eta,
        froude=np.abs(u_lab) / c,
    )


def oscillation_envelope(x: np.ndarray, h: np.ndarray,
                         h_base: float = 1.0,
                         floor: float = 1.0e-13) -> tuple[float, float]:
    """Fit A*exp(-x/chi) through the peaks of |h - h_base|.

    Returns (A, chi).  A flat profile (all deviations below `floor`)
    gives A = 0; fewer than three usable peaks is an error because one
    or two points cannot pin an exponential.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(h, dtype=float) - h_base)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and h must be matching 1-d arrays")
    if not (y > floor).any():
        return 0.0, math.inf
    interior = slice(1, -1)
    is_peak = np.zeros_like(y, dtype=bool)
    is_peak[interior] = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])
    is_peak &= y > floor
    idx = np.flatnonzero(is_peak)
    if idx.size < 3:
        raise InsufficientDataError(
            f"only {idx.size} peaks above floor; need at least 3")
    slope, intercept = np.polyfit(x[idx], np.log(y[idx]), 1)
    chi = -1.0 / slope if slope < 0.0 else math.inf
    return float(np.exp(intercept)), float(chi)
