"""Grid, bed, and state containers for the 1D finite-volume solver.

Cells are numbered 0..J-1 between J+1 interface positions. All per-cell
arrays have length J and all per-interface arrays length J+1. A separate
padded container (`GhostedState`) carries two ghost cells per side for
stencil operations; it is produced by the boundary-condition logic in
`timestepping` and consumed by reconstruction, detectors, and fluxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InvalidStateError

# Ghost layers per side. Two are needed so that the outermost interior
# interface sees fully reconstructed cells on both sides.
N_GHOST = 2


@dataclass
class Grid:
    """Interface positions plus an optional uniform frame drift.

    `frame_velocity` is metadata: the grid itself never moves, but output
    quantities that are frame-dependent (the characteristic invariants)
    add it back so that results can be read in the original frame of the
    problem the run represents.
    """

    x_interface: np.ndarray
    frame_velocity: float = 0.0

    def __post_init__(self) -> None:
        self.x_interface = np.asarray(self.x_interface, dtype=float)
        if self.x_interface.ndim != 1 or self.x_interface.size < 2:
            raise ValueError("grid needs at least two interface positions")
        if not np.all(np.diff(self.x_interface) > 0):
            raise ValueError("interface positions must be strictly increasing")

    @property
    def n_cells(self) -> int:
        return self.x_interface.size - 1

    @property
    def x_left(self) -> float:
        return float(self.x_interface[0])

    @property
    def x_right(self) -> float:
        return float(self.x_interface[-1])

    @property
    def span(self) -> float:
        return self.x_right - self.x_left

    @property
    def dx(self) -> np.ndarray:
        """Cell widths, length J."""
        return np.diff(self.x_interface)

    @property
    def x_center(self) -> np.ndarray:
        return 0.5 * (self.x_interface[:-1] + self.x_interface[1:])

    @property
    def dx_mid(self) -> np.ndarray:
        """Center-to-center spacings (dx_j + dx_{j+1})/2, length J-1."""
        dx = self.dx
        return 0.5 * (dx[:-1] + dx[1:])


@dataclass
class BedProfile:
    """Bed elevation sampled at cell interfaces; cell values are interface means."""

    b_interface: np.ndarray

    def __post_init__(self) -> None:
        self.b_interface = np.asarray(self.b_interface, dtype=float)
        if self.b_interface.ndim != 1 or self.b_interface.size < 2:
            raise ValueError("bed needs at least two interface values")

    @property
    def b_center(self) -> np.ndarray:
        return 0.5 * (self.b_interface[:-1] + self.b_interface[1:])

    @property
    def db_cell(self) -> np.ndarray:
        """Bed increment across each cell, length J."""
        return np.diff(self.b_interface)

    @property
    def db_mid(self) -> np.ndarray:
        """Center-to-center bed increments, length J-1."""
        b = self.b_center
        return b[1:] - b[:-1]


@dataclass
class PhysParams:
    g: float = 1.0

    def __post_init__(self) -> None:
        if not self.g > 0:
            raise ValueError("gravity must be positive")


@dataclass
class State:
    """Cell-averaged depth and discharge at a time instant.

    Depth is kept nonnegative by the time stepper (negative stage values
    are clipped and logged); discharge is zero wherever depth is zero.
    Constructors of intermediate stage data may hold violations briefly,
    so no validation happens here.
    """

    h: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.h.shape != self.q.shape:
            raise ValueError("depth and discharge arrays must have equal shape")

    def copy(self) -> "State":
        return State(self.h.copy(), self.q.copy(), self.t)


@dataclass
class GhostedState:
    """Padded per-cell data: N_GHOST ghost cells on each side of the J interior.

    Static geometry (widths, bed) is padded alongside the fields so stencil
    code never needs to special-case the boundary. `x_ref` is the interior
    domain length used to nondimensionalise detector quantities.
    """

    h: np.ndarray          # (J + 2*N_GHOST,)
    q: np.ndarray          # (J + 2*N_GHOST,)
    dx: np.ndarray         # (J + 2*N_GHOST,)
    b_center: np.ndarray   # (J + 2*N_GHOST,)
    db_cell: np.ndarray    # (J + 2*N_GHOST,)
    x_ref: float
    t: float
    g: float = 1.0

    @property
    def n_padded(self) -> int:
        return self.h.size

    @property
    def n_interior(self) -> int:
        return self.h.size - 2 * N_GHOST

    @property
    def interior(self) -> slice:
        return slice(N_GHOST, self.h.size - N_GHOST)

    @property
    def dx_mid(self) -> np.ndarray:
        return 0.5 * (self.dx[:-1] + self.dx[1:])

    @property
    def db_mid(self) -> np.ndarray:
        return self.b_center[1:] - self.b_center[:-1]

    @property
    def eta(self) -> np.ndarray:
        return self.h + self.b_center


def build_uniform_grid(n_cells: int, x_left: float, x_right: float,
                       frame_velocity: float = 0.0) -> Grid:
    """Uniform grid of n_cells cells on [x_left, x_right].

    At least three cells are required so that every interior stencil
    operation has a meaningful center cell.
    """
    if n_cells < 3:
        raise ValueError(f"need at least 3 cells, got {n_cells}")
    if not x_left < x_right:
        raise ValueError("domain must have x_left < x_right")
    x = np.linspace(x_left, x_right, n_cells + 1)
    return Grid(x, frame_velocity=frame_velocity)


# Five-point Gauss-Legendre rule: exact for polynomials through degree 9,
# which is more than enough for second-order initial data projection.
_GL_NODES, _GL_WEIGHTS = leggauss(5)


def init_cell_averages(fn: Callable[[np.ndarray], np.ndarray],
                       grid: Grid) -> np.ndarray:
    """Project a pointwise profile onto cell averages by quadrature.

    `fn` must accept a vector of positions and return values of the same
    shape. Averages are exact for smooth profiles up to the quadrature
    order; discontinuous profiles should be split at their jump positions
    by the caller before using this.
    """
    xl = grid.x_interface[:-1]
    dx = grid.dx
    # Map the reference nodes on [-1, 1] into every cell at once.
    x_nodes = xl[:, None] + 0.5 * dx[:, None] * (_GL_NODES[None, :] + 1.0)
    vals = fn(x_nodes.ravel()).reshape(x_nodes.shape)
    return 0.5 * vals @ _GL_WEIGHTS


def region_mask(grid: Grid, region) -> np.ndarray:
    """Boolean cell mask from an (lo, hi) interval, predicate, or mask."""
    if callable(region):
        mask = np.asarray(region(grid.x_center), dtype=bool)
    elif isinstance(region, np.ndarray) and region.dtype == bool:
        mask = region
    else:
        lo, hi = region
        mask = (grid.x_center >= lo) & (grid.x_center <= hi)
    if mask.shape != (grid.n_cells,):
        raise ValueError("region mask does not match the grid")
    return mask


def l1_error(sim: np.ndarray, exact: np.ndarray, grid: Grid,
             region) -> float:
    """Mean absolute difference over cells whose centers lie in the region.

    `region` is an (lo, hi) interval, a predicate on center positions, or
    a boolean cell mask. An empty region is an error, not a zero.
    """
    sim = np.asarray(sim, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if sim.shape != exact.shape or sim.size != grid.n_cells:
        raise ValueError("field arrays must match the grid")
    mask = region_mask(grid, region)
    if not mask.any():
        raise ValueError("no cell centers inside the requested region")
    return float(np.mean(np.abs(sim[mask] - exact[mask])))


def require_nonnegative_depth(h: np.ndarray, where: str) -> None:
    """Raise if any cell-average depth is negative."""
    if np.any(h < 0):
        j = int(np.argmin(h))
        raise InvalidStateError(
            f"negative depth {h[j]:.3e} in cell {j} passed to {where}")
