"""Piecewise-linear reconstruction variants for shallow water with bed.

All variants fit the same template: a limited slope is computed for the
depth twice, once in depth h and once in surface elevation eta = h + b,
and the gradient actually used is the convex blend
(1 - gamma) * grad_h + gamma * grad_eta. Surface-based slopes keep the
lake-at-rest state exactly; depth-based slopes keep reconstructed depths
nonnegative on drying slopes. The blend coefficient gamma and the
gradient suppressors theta_h/theta_q are what distinguish the variants:

  SkT               gamma from the depth-vs-bed-variation ratio, both
                    suppressors driven by the shock/drying detectors.
  SkK               same gamma, theta_h = 1, theta_q = depth-ratio cap
                    with K slightly above 1.
  PlainMinmod       same gamma, no suppression (theta = 1).
  Ku02              gamma snaps to 0 when any stencil depth is below a
                    fixed threshold, else 1; no suppression.
  Ku07              surface-based everywhere, but gamma is clamped just
                    enough to zero out a negative interface depth;
                    interface discharges are damped where the interface
                    depth falls under one cell width.
  Ch15              surface-based unless an interface depth would go
                    negative, in which case the depth gradient is zeroed;
                    velocity (not discharge) is reconstructed, and
                    interface discharge is the product u * h.
  PiecewiseConstant all gradients zero.

Interface numbering: k = 0..J. The value pair at interface k is
(minus, plus) = (right edge of cell k-1, left edge of cell k), the ghost
cells supplying the outermost edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidStateError
from .mesh import N_GHOST, GhostedState, require_nonnegative_depth


class Scheme(str, Enum):
    SKT = "SkT"
    SKK = "SkK"
    KU02 = "Ku02"
    KU07 = "Ku07"
    CH15 = "Ch15"
    PIECEWISE_CONSTANT = "PiecewiseConstant"
    PLAIN_MINMOD = "PlainMinmod"


@dataclass
class SchemeConfig:
    """Reconstruction variant plus every tunable the variants read.

    Defaults reproduce the reference setup. `x_ref` defaults to the
    domain length and `eps_ku07` to the local cell width; None selects
    those run-dependent values.
    """

    scheme: Scheme = Scheme.SKT
    alpha_plus: float = 0.75
    alpha_minus: float = 0.75
    alpha_center: float = 0.25
    fr0: float = 10.0
    p1: float = 0.5
    p2: float = 2.0
    p3: float = 1.0
    p4: float = 2.0
    k_detector: float = 100.0
    k_skk_coeff: float = 10.0
    h_ku02: float = 0.1
    eps_ku07: float | None = None
    eps_ch15: float = 1e-8
    lambda_ref: float = 1.0
    x_ref: float | None = None

    def __post_init__(self) -> None:
        self.scheme = Scheme(self.scheme)
        for name in ("alpha_plus", "alpha_minus", "alpha_center"):
            a = getattr(self, name)
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {a}")
        if not 0.0 < self.p1 < 1.0:
            raise ValueError("p1 must lie strictly inside (0, 1)")
        if self.p1 * self.p2 <= 0.0:
            raise ValueError("p1*p2 must be positive")
        # Second-order accuracy away from shocks needs the smooth-region
        # defect 1 - theta to vanish at least quadratically.
        if self.p2 * self.p3 * (1.0 - self.p1) < 1.0:
            raise ValueError("p2*p3*(1-p1) must be at least 1")
        if self.p4 < 1.0:
            raise ValueError("p4 must be at least 1")
        if not self.fr0 > 0.0:
            raise ValueError("fr0 must be positive")
        if not self.k_detector > 1.0:
            raise ValueError("k_detector must exceed 1")


@dataclass
class ReconDiagnostics:
    """Ingredients of the blend coefficient, interior cells only."""

    xi: np.ndarray        # depth-to-bed-variation ratio
    h_down: np.ndarray    # lower bound on reconstructible depth
    db_up: np.ndarray     # upper bound on bed variation (incl. Froude floor)
    b_fast: np.ndarray    # fast-fluid contribution (q^2 / (Fr0^2 g))^(1/3)


@dataclass
class ReconOutput:
    """Gradients, interface values, and blend/suppressor fields.

    Per-cell arrays cover the J interior cells; interface arrays have
    J+1 entries with (minus, plus) sides as described in the module
    docstring. Interface depths are nonnegative for every variant except
    Ku02, which is deliberately left able to produce negative values.
    """

    grad_h: np.ndarray
    grad_q: np.ndarray
    h_minus: np.ndarray
    h_plus: np.ndarray
    q_minus: np.ndarray
    q_plus: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    diagnostics: ReconDiagnostics | None = None


def minmod(*args: np.ndarray) -> np.ndarray:
    """Smallest-magnitude argument if all agree in sign, else zero."""
    stacked = np.stack([np.asarray(a, dtype=float) for a in args])
    lo = stacked.min(axis=0)
    hi = stacked.max(axis=0)
    return np.where(lo > 0, lo, np.where(hi < 0, hi, 0.0))


def slope_minmod(v_prev: np.ndarray, v: np.ndarray, v_next: np.ndarray,
                 dx: np.ndarray, cfg: SchemeConfig) -> np.ndarray:
    """Generalised minmod slope with one-sided weights 2*alpha.

    With the default alphas this limits between 3/2 times the one-sided
    differences and the plain central difference.
    """
    return minmod(
        2.0 * cfg.alpha_plus * (v - v_prev) / dx,
        2.0 * cfg.alpha_center * (v_next - v_prev) / dx,
        2.0 * cfg.alpha_minus * (v_next - v) / dx,
    )


def depth_gradients(gs: GhostedState, theta_h: np.ndarray,
                    cfg: SchemeConfig) -> tuple[np.ndarray, np.ndarray]:
    """Both candidate depth gradients on the padded layout, ends zero.

    The surface-based candidate is the slope of eta shifted by the bed
    gradient, so that a flat surface yields grad_h = -db/dx exactly.
    The suppressor multiplies only the limited slopes, never the bed
    shift: a suppressed cell degrades towards the piecewise-constant
    surface reconstruction, not towards a flat depth.
    """
    n = gs.n_padded
    core = slice(1, n - 1)
    h, eta, dx = gs.h, gs.eta, gs.dx

    grad_h = np.zeros(n)
    grad_eta = np.zeros(n)
    sig_h = slope_minmod(h[:-2], h[1:-1], h[2:], dx[core], cfg)
    sig_eta = slope_minmod(eta[:-2], eta[1:-1], eta[2:], dx[core], cfg)
    grad_h[core] = theta_h[core] * sig_h
    grad_eta[core] = theta_h[core] * sig_eta - gs.db_cell[core] / dx[core]
    return grad_h, grad_eta


def convex_coefficient(gs: GhostedState, cfg: SchemeConfig
                       ) -> tuple[np.ndarray, ReconDiagnostics]:
    """Blend coefficient for the depth/surface gradient combination.

    gamma ramps from 0 (shallow or fast: reconstruct depth) to 1 (deep
    and slow: reconstruct surface) as the ratio xi of the cell depth to
    an optimistic local bed variation crosses [1, 1 + 1/G].  The bed
    variation is floored by a discharge term so that fast thin films
    keep gamma = 0 regardless of how flat the bed is; where even that
    floor is zero the two branches coincide and gamma is set to 1.
    Returns padded arrays; end entries are not meaningful.
    """
    n = gs.n_padded
    core = slice(1, n - 1)
    h, dx = gs.h, gs.dx
    ap, am, ac = cfg.alpha_plus, cfg.alpha_minus, cfg.alpha_center

    # The cap must depend symmetrically on the stencil: reducing it by
    # one-sided depth drops would widen the blend band on falling shores
    # only, breaking rest states that are mirror images of each other.
    # The cell depth alone still keeps every reconstructed edge depth
    # nonnegative because gamma*db_up <= (1 - alpha) * (h - db_up).
    h_down = h[core].copy()

    b_fast = (gs.q[core] ** 2 / (cfg.fr0 ** 2 * gs.g)) ** (1.0 / 3.0)
    db2 = 0.5 * gs.db_cell[core]
    db_mid = gs.db_mid
    db_wide = gs.b_center[2:] - gs.b_center[:-2]
    db_up = np.maximum.reduce([
        np.abs(db2 - ap * db_mid[:-1]),
        np.abs(db2),
        np.abs(db2 - ac * db_wide),
        np.abs(db2 - am * db_mid[1:]),
        b_fast,
    ])

    g_slope = 1.0 - max(ap, am)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = h_down / db_up
    gamma_core = np.where(db_up == 0.0, 1.0,
                          np.clip(g_slope * (xi - 1.0), 0.0, 1.0))

    gamma = np.zeros(n)
    gamma[core] = gamma_core
    diag = ReconDiagnostics(xi=xi, h_down=h_down, db_up=db_up, b_fast=b_fast)
    return gamma, diag


def combine_gradients(gamma: np.ndarray, grad_h: np.ndarray,
                      grad_eta: np.ndarray) -> np.ndarray:
    return (1.0 - gamma) * grad_h + gamma * grad_eta


def flux_gradient(gs: GhostedState, theta_q: np.ndarray,
                  cfg: SchemeConfig) -> np.ndarray:
    """Suppressed minmod gradient of the discharge, padded, ends zero."""
    n = gs.n_padded
    core = slice(1, n - 1)
    q, dx = gs.q, gs.dx
    grad_q = np.zeros(n)
    grad_q[core] = theta_q[core] * slope_minmod(q[:-2], q[1:-1], q[2:],
                                                dx[core], cfg)
    return grad_q


def _gamma_ku02(gs: GhostedState, cfg: SchemeConfig) -> np.ndarray:
    """Binary blend: depth-based when any stencil depth is shallow."""
    n = gs.n_padded
    h = gs.h
    gamma = np.zeros(n)
    stencil_min = np.minimum(np.minimum(h[:-2], h[1:-1]), h[2:])
    gamma[1:-1] = np.where(stencil_min < cfg.h_ku02, 0.0, 1.0)
    return gamma


def _gamma_ku07(gs: GhostedState, grad_h: np.ndarray, grad_eta: np.ndarray
                ) -> np.ndarray:
    """Per-cell clamp zeroing whichever surface-based edge went negative.

    gamma = h_edge^h / (h_edge^h - h_edge^eta) makes the blended edge
    exactly zero on the offending side. When both sides dip negative the
    smaller clamp (the stronger correction) is used. The depth-based
    edge is nonnegative whenever cell depths are, so the denominator is
    strictly positive wherever a clamp is needed.
    """
    n = gs.n_padded
    core = slice(1, n - 1)
    half = 0.5 * gs.dx[core]
    h = gs.h[core]

    left_h = h - half * grad_h[core]
    right_h = h + half * grad_h[core]
    left_eta = h - half * grad_eta[core]
    right_eta = h + half * grad_eta[core]

    with np.errstate(divide="ignore", invalid="ignore"):
        clamp_left = left_h / (left_h - left_eta)
        clamp_right = right_h / (right_h - right_eta)
    gamma_core = np.ones(n - 2)
    bad_left = left_eta < 0
    bad_right = right_eta < 0
    gamma_core[bad_left] = clamp_left[bad_left]
    gamma_core[bad_right] = clamp_right[bad_right]
    both = bad_left & bad_right
    gamma_core[both] = np.minimum(clamp_left[both], clamp_right[both])

    gamma = np.ones(n)
    gamma[core] = gamma_core
    return gamma


def _gamma_ch15(gs: GhostedState, grad_h: np.ndarray, grad_eta: np.ndarray
                ) -> np.ndarray:
    """Zero the whole depth gradient in cells where a surface edge is negative.

    Expressed as a blend, gamma = grad_h / (grad_h - grad_eta) makes the
    combined gradient vanish. The gradients can only coincide where the
    surface edges are already nonnegative, so the ratio is well defined
    wherever it is used.
    """
    n = gs.n_padded
    core = slice(1, n - 1)
    half = 0.5 * gs.dx[core]
    h = gs.h[core]
    left_eta = h - half * grad_eta[core]
    right_eta = h + half * grad_eta[core]
    bad = (left_eta < 0) | (right_eta < 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = grad_h[core] / (grad_h[core] - grad_eta[core])
    gamma = np.ones(n)
    gamma_core = np.ones(n - 2)
    gamma_core[bad] = ratio[bad]
    gamma[core] = gamma_core
    return gamma


def _desingularised_velocity(h: np.ndarray, q: np.ndarray,
                             eps: float) -> np.ndarray:
    """q/h regularised to 2 q h / (h^2 + max(h^2, eps^2)); zero on dry cells."""
    den = h * h + np.maximum(h * h, eps * eps)
    out = np.zeros_like(h)
    np.divide(2.0 * q * h, den, out=out, where=den > 0)
    return out


def _edge_values(center: np.ndarray, grad: np.ndarray,
                 dx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * dx
    return center - half * grad, center + half * grad


def reconstruct(gs: GhostedState, theta_h: np.ndarray, theta_q: np.ndarray,
                cfg: SchemeConfig) -> ReconOutput:
    """Interface values and gradients for the configured variant.

    `theta_h`/`theta_q` are padded suppressor arrays (from
    `detectors.scheme_suppressors`); variants that ignore suppression are
    simply handed ones. Raises InvalidStateError on negative input depths.
    """
    require_nonnegative_depth(gs.h, "reconstruct")
    n = gs.n_padded
    core = slice(1, n - 1)
    scheme = cfg.scheme
    diag: ReconDiagnostics | None = None

    if scheme == Scheme.PIECEWISE_CONSTANT:
        grad_h = np.zeros(n)
        grad_q = np.zeros(n)
        gamma = np.zeros(n)
    elif scheme in (Scheme.SKT, Scheme.SKK, Scheme.PLAIN_MINMOD):
        gh, ge = depth_gradients(gs, theta_h, cfg)
        gamma, diag = convex_coefficient(gs, cfg)
        grad_h = combine_gradients(gamma, gh, ge)
        grad_q = flux_gradient(gs, theta_q, cfg)
    elif scheme == Scheme.KU02:
        gh, ge = depth_gradients(gs, theta_h, cfg)
        gamma = _gamma_ku02(gs, cfg)
        grad_h = combine_gradients(gamma, gh, ge)
        grad_q = flux_gradient(gs, theta_q, cfg)
    elif scheme == Scheme.KU07:
        gh, ge = depth_gradients(gs, theta_h, cfg)
        gamma = _gamma_ku07(gs, gh, ge)
        grad_h = combine_gradients(gamma, gh, ge)
        grad_q = flux_gradient(gs, theta_q, cfg)
    elif scheme == Scheme.CH15:
        gh, ge = depth_gradients(gs, theta_h, cfg)
        gamma = _gamma_ch15(gs, gh, ge)
        grad_h = combine_gradients(gamma, gh, ge)
        grad_q = None  # set from the product edges below
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown scheme {scheme}")

    h_left, h_right = _edge_values(gs.h, grad_h, gs.dx)

    if scheme == Scheme.CH15:
        u = _desingularised_velocity(gs.h, gs.q, cfg.eps_ch15)
        grad_u = np.zeros(n)
        grad_u[core] = slope_minmod(u[:-2], u[1:-1], u[2:], gs.dx[core], cfg)
        u_left, u_right = _edge_values(u, grad_u, gs.dx)
        q_left = u_left * h_left
        q_right = u_right * h_right
        with np.errstate(invalid="ignore"):
            grad_q = np.zeros(n)
            grad_q[core] = (q_right[core] - q_left[core]) / gs.dx[core]
    else:
        q_left, q_right = _edge_values(gs.q, grad_q, gs.dx)

    if scheme != Scheme.KU02:
        # Every variant except Ku02 guarantees nonnegative edges; anything
        # beyond round-off negative here is an implementation bug.
        tol = -1e-10 * max(1.0, float(gs.h.max(initial=0.0)))
        worst = min(float(h_left[core].min(initial=0.0)),
                    float(h_right[core].min(initial=0.0)))
        if worst < tol:
            raise InvalidStateError(
                f"reconstruction lost positivity: edge depth {worst:.3e} "
                f"under scheme {scheme.value}")
        np.maximum(h_left, 0.0, out=h_left)
        np.maximum(h_right, 0.0, out=h_right)
        q_left = np.where(h_left == 0.0, 0.0, q_left)
        q_right = np.where(h_right == 0.0, 0.0, q_right)

    # Interface k sits between padded cells k+1 and k+2.
    n_iface = gs.n_interior + 1
    lo = N_GHOST - 1
    h_minus = h_right[lo:lo + n_iface]
    h_plus = h_left[lo + 1:lo + 1 + n_iface]
    q_minus = q_right[lo:lo + n_iface]
    q_plus = q_left[lo + 1:lo + 1 + n_iface]

    if scheme == Scheme.KU07:
        eps_minus = gs.dx[lo:lo + n_iface] if cfg.eps_ku07 is None \
            else np.full(n_iface, cfg.eps_ku07)
        eps_plus = gs.dx[lo + 1:lo + 1 + n_iface] if cfg.eps_ku07 is None \
            else np.full(n_iface, cfg.eps_ku07)
        q_minus = q_minus * _discharge_damping(h_minus, eps_minus)
        q_plus = q_plus * _discharge_damping(h_plus, eps_plus)

    interior = gs.interior
    return ReconOutput(
        grad_h=grad_h[interior].copy(),
        grad_q=grad_q[interior].copy(),
        h_minus=h_minus.copy(), h_plus=h_plus.copy(),
        q_minus=q_minus.copy(), q_plus=q_plus.copy(),
        gamma=gamma[interior].copy(),
        theta=theta_q[interior].copy(),
        diagnostics=_trim_diagnostics(diag, gs) if diag is not None else None,
    )


def _discharge_damping(h_edge: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """sqrt(2 h^4 / (h^4 + max(h^4, eps^4))): 1 for deep edges, ~0 under eps."""
    h4 = h_edge ** 4
    den = h4 + np.maximum(h4, eps ** 4)
    out = np.zeros_like(h_edge)
    np.divide(2.0 * h4, den, out=out, where=den > 0)
    return np.sqrt(out)


def _trim_diagnostics(diag: ReconDiagnostics,
                      gs: GhostedState) -> ReconDiagnostics:
    # Core arrays cover padded cells 1..n-2; the interior is one further in.
    s = slice(N_GHOST - 1, N_GHOST - 1 + gs.n_interior)
    return ReconDiagnostics(xi=diag.xi[s].copy(), h_down=diag.h_down[s].copy(),
                            db_up=diag.db_up[s].copy(),
                            b_fast=diag.b_fast[s].copy())
