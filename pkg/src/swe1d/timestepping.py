"""Boundary padding, time-step control, and the SSP-RK2 evolution loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InvalidStateError, NumericalFailureError
from .fluxes import assemble_rhs
from .mesh import (BedProfile, GhostedState, Grid, N_GHOST, PhysParams,
                   State)
from .reconstruction import SchemeConfig

# Cells at or below this depth are ignored by velocity diagnostics.
DRY_THRESHOLD = 1e-10


class BoundaryKind(str, Enum):
    WALL_ZERO_VELOCITY = "WallZeroVelocity"
    EXTRAPOLATE = "Extrapolate"


@dataclass(frozen=True)
class BoundarySpec:
    left: BoundaryKind = BoundaryKind.WALL_ZERO_VELOCITY
    right: BoundaryKind = BoundaryKind.WALL_ZERO_VELOCITY


@dataclass
class TimeControls:
    """Run horizon and step-size policy.

    `u_max_halt`, when set, aborts the run with a numerical-failure error
    as soon as any cell deeper than the dry threshold moves faster than
    the given speed; unsuppressed reconstructions on drying problems blow
    up through exactly that channel, and halting keeps the failure
    reportable instead of grinding the step size to nothing.
    """

    t_end: float
    cfl: float = 0.25
    dt_max: float = np.inf
    snapshot_times: tuple[float, ...] = ()
    u_max_halt: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        self.snapshot_times = tuple(sorted(self.snapshot_times))


@dataclass
class RunResult:
    final: State
    n_steps: int
    clipped_mass: float
    snapshots: list[State] = field(default_factory=list)


def _mirror_bed_interfaces(b_interface: np.ndarray) -> np.ndarray:
    """Pad bed interfaces with mirror images about each end interface."""
    ng = N_GHOST
    left = b_interface[ng:0:-1]
    right = b_interface[-2:-ng - 2:-1]
    return np.concatenate([left, b_interface, right])


def apply_boundaries(state: State, grid: Grid, bed: BedProfile,
                     bcs: BoundarySpec,
                     phys: PhysParams) -> GhostedState:
    """Build the ghost-padded state the stencil operators consume.

    WallZeroVelocity mirrors depths and negates discharges, and the bed
    is mirrored for both kinds; with symmetric one-sided limiter weights
    this makes the reconstruction at a wall interface an exact reflection,
    so the wall mass flux vanishes identically. Extrapolate copies the
    outermost cell into both ghosts.
    """
    ng = N_GHOST
    J = grid.n_cells
    n = J + 2 * ng
    h = np.empty(n)
    q = np.empty(n)
    h[ng:n - ng] = state.h
    q[ng:n - ng] = state.q

    if bcs.left == BoundaryKind.WALL_ZERO_VELOCITY:
        h[:ng] = state.h[:ng][::-1]
        q[:ng] = -state.q[:ng][::-1]
    else:
        h[:ng] = state.h[0]
        q[:ng] = state.q[0]
    if bcs.right == BoundaryKind.WALL_ZERO_VELOCITY:
        h[n - ng:] = state.h[-ng:][::-1]
        q[n - ng:] = -state.q[-ng:][::-1]
    else:
        h[n - ng:] = state.h[-1]
        q[n - ng:] = state.q[-1]

    dx = np.empty(n)
    dx_in = grid.dx
    dx[ng:n - ng] = dx_in
    dx[:ng] = dx_in[:ng][::-1]
    dx[n - ng:] = dx_in[-ng:][::-1]

    b_pad = _mirror_bed_interfaces(bed.b_interface)
    b_center = 0.5 * (b_pad[:-1] + b_pad[1:])
    db_cell = np.diff(b_pad)

    return GhostedState(h=h, q=q, dx=dx, b_center=b_center,
                        db_cell=db_cell, x_ref=grid.span, t=state.t,
                        g=phys.g)


def max_wave_speed(state: State, phys: PhysParams) -> float:
    """max(|u| + c) over cells with positive depth; zero if fully dry.

    Every cell with h > 0 contributes, however thin. Thin films carry
    real momentum at a wetting front, and letting their speeds feed the
    CFL condition is what keeps front velocities bounded; excluding them
    lets sub-threshold cells evolve unconstrained and re-enter the wet
    set with runaway discharge.
    """
    wet = state.h > 0.0
    if not wet.any():
        return 0.0
    u = state.q[wet] / state.h[wet]
    c = np.sqrt(phys.g * state.h[wet])
    return float(np.max(np.abs(u) + c))


def stable_dt(state: State, grid: Grid, phys: PhysParams,
              controls: TimeControls) -> float:
    """CFL-limited step: cfl * min(dx) / max wave speed, capped by dt_max."""
    s = max_wave_speed(state, phys)
    if s == 0.0:
        return float(controls.dt_max)
    return float(min(controls.cfl * grid.dx.min() / s, controls.dt_max))


def heun_step(y: np.ndarray, dt: float, f: Callable[[np.ndarray], np.ndarray],
              post_stage: Callable[[np.ndarray], np.ndarray] | None = None
              ) -> np.ndarray:
    """One step of the two-stage strong-stability-preserving RK2 method.

    y1 = y + dt f(y); result = (y + y1 + dt f(y1)) / 2. Each stage result
    passes through `post_stage` (projection/validation hook) if given.
    """
    y1 = y + dt * f(y)
    if post_stage is not None:
        y1 = post_stage(y1)
    y2 = 0.5 * (y + y1 + dt * f(y1))
    if post_stage is not None:
        y2 = post_stage(y2)
    return y2


def ssp_rk2_step(state: State, grid: Grid, bed: BedProfile,
                 phys: PhysParams, cfg: SchemeConfig, bcs: BoundarySpec,
                 dt: float) -> tuple[State, float]:
    """Advance one step; returns the new state and the clipped mass.

    After each stage, negative depths are clipped to zero, the mass
    deficit is logged, and discharge is zeroed in exactly the clipped
    cells (a cell with no water cannot carry momentum). Cells that are
    merely thin keep their discharge: zeroing it there amputates the
    momentum of an advancing wetting front and visibly stalls it. Their
    velocity is instead limited to twice the bulk maximum wave speed:
    a film thinner than the dry threshold cannot outrun the flow that
    feeds it, and without the limit stranded sub-threshold residue
    accumulates discharge against vanishing depth until q/h collapses
    the stable step. Non-finite stage values raise a numerical-failure
    error.
    """
    log = {"clipped": 0.0}
    dx = grid.dx

    def f(y: np.ndarray) -> np.ndarray:
        s = State(y[0], y[1], state.t)
        gs = apply_boundaries(s, grid, bed, bcs, phys)
        r = assemble_rhs(gs, cfg)
        return np.stack([r.dh_dt, r.dq_dt])

    def post(y: np.ndarray) -> np.ndarray:
        h, q = y[0], y[1]
        neg = h < 0
        if neg.any():
            log["clipped"] += float(-(h[neg] * dx[neg]).sum())
            h = np.where(neg, 0.0, h)
        q = np.where(h <= 0.0, 0.0, q)
        thin = (h > 0.0) & (h <= DRY_THRESHOLD)
        if thin.any():
            wet = h > DRY_THRESHOLD
            if wet.any():
                speed = np.abs(q[wet] / h[wet]) + np.sqrt(phys.g * h[wet])
                limit = 2.0 * float(speed.max()) * h[thin]
                q[thin] = np.clip(q[thin], -limit, limit)
            else:
                q = np.where(thin, 0.0, q)
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(q))):
            bad = np.flatnonzero(~(np.isfinite(h) & np.isfinite(q)))
            raise NumericalFailureError("non-finite", state.t,
                                        cell=int(bad[0]),
                                        detail="stage produced nan/inf")
        return np.stack([h, q])

    y = heun_step(np.stack([state.h, state.q]), dt, f, post)
    return State(y[0].copy(), y[1].copy(), state.t + dt), log["clipped"]


def _check_velocity_halt(state: State, controls: TimeControls) -> None:
    if controls.u_max_halt is None:
        return
    wet = state.h > DRY_THRESHOLD
    if not wet.any():
        return
    u = np.abs(state.q[wet] / state.h[wet])
    i = int(np.argmax(u))
    if u[i] > controls.u_max_halt:
        cell = int(np.flatnonzero(wet)[i])
        raise NumericalFailureError(
            "u-max", state.t, cell=cell,
            detail=f"|u| = {u[i]:.3e} exceeded halt threshold "
                   f"{controls.u_max_halt:.3e}")


def run(state0: State, grid: Grid, bed: BedProfile, phys: PhysParams,
        cfg: SchemeConfig, bcs: BoundarySpec, controls: TimeControls,
        observer: Callable[[State], None] | None = None) -> RunResult:
    """Evolve to t_end, recording snapshots at the requested times.

    Snapshot times are hit exactly (the step is shortened to land on
    them). The loop is strictly serial and allocation patterns are
    deterministic, so repeated runs are bit-identical. Failures raise
    NumericalFailureError with the time and cell attached.
    """
    state = state0.copy()
    t_end = float(controls.t_end)
    time_tol = 1e-12 * max(1.0, abs(t_end), abs(state.t))
    dt_floor = 1e-14 * max(1.0, abs(t_end - state.t))

    pending = [t for t in controls.snapshot_times if t > state.t + time_tol]
    snapshots: list[State] = []

    def maybe_snapshot() -> None:
        # Only fires when the state actually landed on the next pending
        # time; a CFL-limited step that stopped short must not trigger it.
        if pending and abs(state.t - pending[0]) <= time_tol:
            state.t = pending.pop(0)
            snapshots.append(state.copy())
            if observer is not None:
                observer(snapshots[-1])

    # A snapshot exactly at the start time is served from the initial data.
    for t in controls.snapshot_times:
        if abs(t - state.t) <= time_tol:
            snapshots.append(state.copy())
            if observer is not None:
                observer(snapshots[-1])

    n_steps = 0
    clipped = 0.0
    _check_velocity_halt(state, controls)
    while state.t < t_end - time_tol:
        dt = stable_dt(state, grid, phys, controls)
        target = pending[0] if pending else t_end
        target = min(target, t_end)
        dt = min(dt, target - state.t)
        if not np.isfinite(dt) or dt <= dt_floor:
            raise NumericalFailureError(
                "dt-collapse", state.t,
                detail=f"stable step {dt:.3e} below floor {dt_floor:.3e}")
        try:
            state, c = ssp_rk2_step(state, grid, bed, phys, cfg, bcs, dt)
        except InvalidStateError as exc:
            raise NumericalFailureError("invalid-state", state.t,
                                        detail=str(exc)) from exc
        clipped += c
        n_steps += 1
        maybe_snapshot()
        _check_velocity_halt(state, controls)

    if abs(state.t - t_end) <= time_tol:
        state.t = t_end
    return RunResult(final=state, n_steps=n_steps, clipped_mass=clipped,
                     snapshots=snapshots)
