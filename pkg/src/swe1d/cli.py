"""Command-line front end: run problems, sweep resolutions, write results."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .detectors import scheme_suppressors
from .errors import NumericalFailureError
from .mesh import BedProfile, Grid, PhysParams, State, l1_error
from .problems import (
    TestProblem,
    characteristic_invariants,
    exact_solution,
    get_problem,
    problem_ids,
    problem_setup,
)
from .reconstruction import Scheme, SchemeConfig, reconstruct
from .timestepping import (
    DRY_THRESHOLD,
    BoundarySpec,
    TimeControls,
    apply_boundaries,
    run,
)

SWEEP_LADDER = (100, 178, 316, 562, 1000, 1778, 3162, 5623, 10000)

CSV_COLUMNS = ("x_center", "h", "q", "u", "b_center", "eta",
               "gamma", "theta", "C_minus", "C_plus")


class UsageError(ValueError):
    """Bad flags or an unusable configuration; maps to exit code 1."""


@dataclass
class RunConfig:
    problem_id: str
    scheme: Scheme
    n_cells: int = 1000
    cfl: float = 0.25
    t_end: float | None = None
    snapshot_times: tuple[float, ...] | None = None
    out_dir: str = "runs"
    sweep: bool = False
    sweep_cells: tuple[int, ...] = SWEEP_LADDER
    u_max_halt: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        self.scheme = Scheme(self.scheme)
        if self.n_cells < 3:
            raise UsageError("--cells must be at least 3")
        if any(j < 3 for j in self.sweep_cells):
            raise UsageError("sweep resolutions must be at least 3")
        if not 0.0 < self.cfl <= 0.5:
            raise UsageError("--cfl must lie in (0, 0.5]")
        if self.snapshot_times is not None:
            self.snapshot_times = tuple(sorted(self.snapshot_times))


@dataclass
class RunRecord:
    """Everything a finished (or failed) run leaves behind, JSON-ready."""

    config: dict
    status: str
    t_final: float
    n_steps: int
    clipped_mass: float
    duration_s: float
    snapshot_files: list[str] = field(default_factory=list)
    errors: dict = field(default_factory=dict)
    failure: dict | None = None


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the exit-code contract
    # reserves 2 for numerical failures, so usage problems are raised
    # instead and mapped to 1 in main().
    def error(self, message: str) -> None:
        raise UsageError(message)


_SCHEME_BY_TOKEN = {s.value.lower(): s for s in Scheme}


def _parse_scheme(token: str) -> Scheme:
    try:
        return _SCHEME_BY_TOKEN[token.lower()]
    except KeyError:
        options = ", ".join(s.value for s in Scheme)
        raise UsageError(
            f"unknown scheme {token!r}; choose from: {options}") from None


def _parse_float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise UsageError(f"bad number list: {text!r}") from None


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.strip().split(","))
    except ValueError:
        raise UsageError(f"bad resolution list: {text!r}") from None


def parse_args(argv: list[str] | None = None) -> RunConfig:
    parser = _Parser(
        prog="swe1d",
        description="Run 1-d shallow-water test problems and record results.")
    parser.add_argument("--problem", required=True, choices=problem_ids())
    parser.add_argument("--scheme", required=True,
                        help="one of: " + ", ".join(s.value for s in Scheme))
    parser.add_argument("--cells", default=None,
                        help="cell count; in sweep mode, a comma list of "
                             "resolutions replacing the default ladder")
    parser.add_argument("--cfl", type=float, default=0.25)
    parser.add_argument("--t-end", type=float, default=None,
                        help="override the problem's default end time")
    parser.add_argument("--snapshots", default=None,
                        help="comma-separated output times (empty to disable)")
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument("--sweep", action="store_true",
                        help="run the resolution ladder and fit slopes")
    parser.add_argument("--u-max-halt", type=float, default=None,
                        help="abort when any wet cell exceeds this speed")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed recorded for randomized test tooling")
    args = parser.parse_args(argv)

    scheme = _parse_scheme(args.scheme)
    n_cells = 1000
    sweep_cells = SWEEP_LADDER
    if args.cells is not None:
        if args.sweep:
            sweep_cells = _parse_int_list(args.cells)
        else:
            try:
                n_cells = int(args.cells)
            except ValueError:
                raise UsageError(
                    f"bad cell count: {args.cells!r}") from None
    snapshots = None
    if args.snapshots is not None:
        snapshots = _parse_float_list(args.snapshots)
    return RunConfig(
        problem_id=args.problem, scheme=scheme, n_cells=n_cells,
        cfl=args.cfl, t_end=args.t_end, snapshot_times=snapshots,
        out_dir=args.out, sweep=args.sweep, sweep_cells=sweep_cells,
        u_max_halt=args.u_max_halt, seed=args.seed)


def _probe_writable(out_dir: Path) -> None:
    """Fail with OSError before any compute if the directory is unusable."""
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / f".probe-{uuid.uuid4().hex}"
    probe.write_text("")
    probe.unlink()


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def cell_diagnostics(state: State, grid: Grid, bed: BedProfile,
                     phys: PhysParams, scfg: SchemeConfig,
                     bcs: BoundarySpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell (gamma, theta) of the reconstruction at this state."""
    gs = apply_boundaries(state, grid, bed, bcs, phys)
    theta_h, theta_q = scheme_suppressors(gs, scfg)
    rec = reconstruct(gs, theta_h, theta_q, scfg)
    return rec.gamma, rec.theta


def write_snapshot_csv(path: Path, state: State, grid: Grid,
                       bed: BedProfile, phys: PhysParams,
                       scfg: SchemeConfig, bcs: BoundarySpec) -> None:
    """One row per cell; u and the invariants are blank where dry.

    The u column is the simulation-frame velocity; C_minus/C_plus are
    lab-frame so phase plots line up across boosted runs.
    """
    gamma, theta = cell_diagnostics(state, grid, bed, phys, scfg, bcs)
    inv = characteristic_invariants(state, grid, bed, phys)
    wet = state.h > DRY_THRESHOLD
    eta = state.h + bed.b_center
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for j in range(grid.n_cells):
            u = _fmt(state.q[j] / state.h[j]) if wet[j] else ""
            cm = _fmt(inv.c_minus[j]) if wet[j] else ""
            cp = _fmt(inv.c_plus[j]) if wet[j] else ""
            writer.writerow([
                _fmt(grid.x_center[j]), _fmt(state.h[j]), _fmt(state.q[j]),
                u, _fmt(bed.b_center[j]), _fmt(eta[j]),
                _fmt(gamma[j]), _fmt(theta[j]), cm, cp,
            ])


def _error_regions(problem: TestProblem, grid: Grid, t: float
                   ) -> dict[str, np.ndarray]:
    """Wet/dry cell masks at time t, from the exact solution."""
    if problem.problem_id == "lake-at-rest":
        # Pinned split: the contact sits exactly at |x| = 1.
        wet = np.abs(grid.x_center) <= 1.0
        return {"wet": wet, "dry": ~wet}
    h_exact, _ = exact_solution(problem.problem_id, grid.x_center, t)
    wet = h_exact > DRY_THRESHOLD
    regions = {"wet": wet}
    if (~wet).any():
        regions["dry"] = ~wet
    return regions


def _final_errors(problem: TestProblem, grid: Grid, state: State
                  ) -> dict[str, float]:
    if not problem.has_exact:
        return {}
    h_exact, _ = exact_solution(problem.problem_id, grid.x_center, state.t)
    out: dict[str, float] = {}
    for name, mask in _error_regions(problem, grid, state.t).items():
        if mask.any():
            out[name + "_h"] = l1_error(state.h, h_exact, grid, mask)
    return out


def _config_echo(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["scheme"] = cfg.scheme.value
    return d


def _failure_info(exc: NumericalFailureError) -> dict:
    return {"kind": exc.kind, "time": exc.time, "cell": exc.cell,
            "detail": exc.detail}


def _json_dump(payload, path: Path) -> None:
    def default(obj):
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Path):
            return str(obj)
        raise TypeError(f"not serializable: {type(obj)!r}")

    path.write_text(json.dumps(payload, indent=2, default=default) + "\n")


def _scheme_config(cfg: RunConfig, grid: Grid) -> SchemeConfig:
    return SchemeConfig(scheme=cfg.scheme, x_ref=grid.span)


def run_single(cfg: RunConfig) -> RunRecord:
    """Run one configuration, writing snapshot CSVs and a JSON record.

    A numerical failure is captured in the record (and later mapped to
    exit code 2) rather than raised; snapshots recorded before the
    failure are kept on disk.
    """
    out_dir = Path(cfg.out_dir)
    _probe_writable(out_dir)

    phys = PhysParams()
    problem, grid, bed, state0 = problem_setup(cfg.problem_id, cfg.n_cells,
                                               phys)
    scfg = _scheme_config(cfg, grid)
    t_end = problem.t_end_default if cfg.t_end is None else cfg.t_end
    snaps = (problem.default_snapshots if cfg.snapshot_times is None
             else cfg.snapshot_times)
    controls = TimeControls(t_end=t_end, cfl=cfg.cfl, snapshot_times=snaps,
                            u_max_halt=cfg.u_max_halt)

    stem = f"{cfg.problem_id}-{cfg.scheme.value}-J{cfg.n_cells}"
    files: list[str] = []

    def observer(s: State) -> None:
        path = out_dir / f"{stem}-snap{len(files):04d}.csv"
        write_snapshot_csv(path, s, grid, bed, phys, scfg,
                           problem.boundaries)
        files.append(str(path))

    started = time.perf_counter()
    failure = None
    try:
        result = run(state0, grid, bed, phys, scfg, problem.boundaries,
                     controls, observer=observer)
        final, n_steps, clipped = (result.final, result.n_steps,
                                   result.clipped_mass)
        errors = _final_errors(problem, grid, final)
    except NumericalFailureError as exc:
        failure = _failure_info(exc)
        final, n_steps, clipped, errors = None, 0, 0.0, {}
    duration = time.perf_counter() - started

    if final is not None:
        path = out_dir / f"{stem}-final.csv"
        write_snapshot_csv(path, final, grid, bed, phys, scfg,
                           problem.boundaries)
        files.append(str(path))

    record = RunRecord(
        config=_config_echo(cfg),
        status="ok" if failure is None else "numerical-failure",
        t_final=final.t if final is not None else (
            failure["time"] if failure["time"] is not None else math.nan),
        n_steps=n_steps,
        clipped_mass=clipped,
        duration_s=duration,
        snapshot_files=files,
        errors=errors,
        failure=failure,
    )
    _json_dump(asdict(record), out_dir / f"{stem}-run.json")
    return record


def _fit_slopes(rows: list[dict]) -> dict[str, float | None]:
    """Log-log slope of each error column against the cell count.

    Needs at least two successful resolutions with positive error;
    otherwise the slope is reported as absent (None).
    """
    slopes: dict[str, float | None] = {}
    names = {k for row in rows for k in row["errors"]}
    for name in sorted(names):
        pts = [(row["n_cells"], row["errors"][name]) for row in rows
               if row["status"] == "ok" and name in row["errors"]
               and row["errors"][name] > 0.0]
        if len(pts) < 2:
            slopes[name] = None
            continue
        lj = np.log10([p[0] for p in pts])
        le = np.log10([p[1] for p in pts])
        slopes[name] = float(np.polyfit(lj, le, 1)[0])
    return slopes


def run_sweep(cfg: RunConfig) -> dict:
    """Run the resolution ladder serially and fit convergence slopes.

    Sub-run failures are recorded and the sweep continues. Problems
    without an exact solution have nothing to measure errors against,
    which makes a sweep request a usage error.
    """
    problem = get_problem(cfg.problem_id)
    if not problem.has_exact:
        raise UsageError(
            f"--sweep needs an exact reference; {cfg.problem_id!r} has none")
    out_dir = Path(cfg.out_dir)
    _probe_writable(out_dir)

    phys = PhysParams()
    t_end = problem.t_end_default if cfg.t_end is None else cfg.t_end
    rows: list[dict] = []
    for n_cells in cfg.sweep_cells:
        _, grid, bed, state0 = problem_setup(cfg.problem_id, n_cells, phys)
        scfg = _scheme_config(cfg, grid)
        controls = TimeControls(t_end=t_end, cfl=cfg.cfl,
                                u_max_halt=cfg.u_max_halt)
        started = time.perf_counter()
        row: dict = {"n_cells": n_cells, "status": "ok", "errors": {},
                     "failure": None}
        try:
            result = run(state0, grid, bed, phys, scfg,
                         problem.boundaries, controls)
            row["errors"] = _final_errors(problem, grid, result.final)
            row["n_steps"] = result.n_steps
            row["clipped_mass"] = result.clipped_mass
        except NumericalFailureError as exc:
            row["status"] = "numerical-failure"
            row["failure"] = _failure_info(exc)
        row["duration_s"] = time.perf_counter() - started
        rows.append(row)

    report = {
        "config": _config_echo(cfg),
        "t_end": t_end,
        "runs": rows,
        "slopes": _fit_slopes(rows),
    }
    stem = f"{cfg.problem_id}-{cfg.scheme.value}-sweep"
    _json_dump(report, out_dir / f"{stem}.json")

    error_names = sorted({k for row in rows for k in row["errors"]})
    with (out_dir / f"{stem}.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_cells", "status"] + error_names)
        for row in rows:
            writer.writerow(
                [row["n_cells"], row["status"]]
                + [_fmt(row["errors"][k]) if k in row["errors"] else ""
                   for k in error_names])
    return report


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        if cfg.sweep:
            run_sweep(cfg)
            return 0
        record = run_single(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    if record.failure is not None:
        info = record.failure
        print(f"numerical failure ({info['kind']}) at t = {info['time']}",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
