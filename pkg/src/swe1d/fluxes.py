"""Numerical flux, geometric source, and the semi-discrete right-hand side.

The spatial discretisation is
    dQ_j/dt = -(F_{j+1/2} - F_{j-1/2}) / dx_j + (0, S_j)
with a two-speed central-upwind interface flux and the interface-depth
source S_j = -g (h at left edge + h at right edge)/2 * db_j/dx_j. With a
surface-based reconstruction both interface depths equal eta - b at their
interface, and the flux-gradient/source sum cancels exactly for a lake at
rest; that cancellation is the well-balancing of the scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError
from .mesh import GhostedState
from .detectors import scheme_suppressors
from .reconstruction import ReconOutput, SchemeConfig, reconstruct

# Interface depths this far below zero are treated as round-off and
# clamped; anything worse is a corrupted state and raises.
_NEGATIVE_DEPTH_TOL = 1e-12


@dataclass
class FluxData:
    """Interface fluxes and the one-sided speed bounds that built them."""

    f_h: np.ndarray
    f_q: np.ndarray
    a_plus: np.ndarray   # >= 0
    a_minus: np.ndarray  # <= 0


@dataclass
class RhsData:
    dh_dt: np.ndarray
    dq_dt: np.ndarray
    source_q: np.ndarray
    flux: FluxData
    recon: ReconOutput


def physical_flux(h: np.ndarray, q: np.ndarray,
                  g: float) -> tuple[np.ndarray, np.ndarray]:
    """(q, q^2/h + g h^2/2); identically zero where there is no water."""
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    wet = h > 0
    f_h = np.where(wet, q, 0.0)
    f_q = np.zeros_like(h)
    np.divide(q * q, h, out=f_q, where=wet)
    f_q += 0.5 * g * h * h
    f_q = np.where(wet, f_q, 0.0)
    return f_h, f_q


def central_upwind_flux(h_minus: np.ndarray, q_minus: np.ndarray,
                        h_plus: np.ndarray, q_plus: np.ndarray,
                        g: float) -> FluxData:
    """Two-speed central-upwind flux from interface value pairs.

    Speed bounds come from both one-sided states; when they collapse
    together (still or dry water) the flux degrades to the plain average,
    which is exact there. Raises InvalidStateError for interface depths
    below round-off tolerance; Ku02 feeds genuinely negative depths here
    when it fails, and this is where that failure surfaces.
    """
    h_minus = np.asarray(h_minus, dtype=float)
    h_plus = np.asarray(h_plus, dtype=float)
    q_minus = np.asarray(q_minus, dtype=float)
    q_plus = np.asarray(q_plus, dtype=float)

    scale = max(1.0, float(h_minus.max(initial=0.0)),
                float(h_plus.max(initial=0.0)))
    worst = min(float(h_minus.min(initial=0.0)),
                float(h_plus.min(initial=0.0)))
    if worst < -_NEGATIVE_DEPTH_TOL * scale:
        cell = int(np.argmin(np.minimum(h_minus, h_plus)))
        raise InvalidStateError(
            f"negative interface depth {worst:.3e} at interface {cell}")
    hm = np.maximum(h_minus, 0.0)
    hp = np.maximum(h_plus, 0.0)

    um = np.zeros_like(hm)
    np.divide(q_minus, hm, out=um, where=hm > 0)
    up = np.zeros_like(hp)
    np.divide(q_plus, hp, out=up, where=hp > 0)
    cm = np.sqrt(g * hm)
    cp = np.sqrt(g * hp)

    a_plus = np.maximum(np.maximum(um + cm, up + cp), 0.0)
    a_minus = np.minimum(np.minimum(um - cm, up - cp), 0.0)

    fm_h, fm_q = physical_flux(hm, q_minus, g)
    fp_h, fp_q = physical_flux(hp, q_plus, g)

    spread = a_plus - a_minus
    degenerate = spread < 1e-12 * np.maximum(
        1.0, np.maximum(np.abs(a_plus), np.abs(a_minus)))
    safe = np.where(degenerate, 1.0, spread)

    f_h = (a_plus * fm_h - a_minus * fp_h
           + a_plus * a_minus * (hp - hm)) / safe
    f_q = (a_plus * fm_q - a_minus * fp_q
           + a_plus * a_minus * (q_plus - q_minus)) / safe
    f_h = np.where(degenerate, 0.5 * (fm_h + fp_h), f_h)
    f_q = np.where(degenerate, 0.5 * (fm_q + fp_q), f_q)
    return FluxData(f_h=f_h, f_q=f_q, a_plus=a_plus, a_minus=a_minus)


def bed_source(recon: ReconOutput, gs: GhostedState) -> np.ndarray:
    """Momentum source per interior cell from the reconstructed edge depths.

    Uses the cell's own two interface depths, so a constant-surface
    reconstruction cancels the flux gradient exactly. The mass equation
    has no source.
    """
    interior = gs.interior
    dx = gs.dx[interior]
    db = gs.db_cell[interior]
    # Left edge of cell j is the plus side of interface j; right edge the
    # minus side of interface j+1.
    h_left = recon.h_plus[:-1]
    h_right = recon.h_minus[1:]
    return -gs.g * 0.5 * (h_left + h_right) * db / dx


def assemble_rhs(gs: GhostedState, cfg: SchemeConfig) -> RhsData:
    """Full semi-discrete right-hand side on a ghost-padded state."""
    theta_h, theta_q = scheme_suppressors(gs, cfg)
    recon = reconstruct(gs, theta_h, theta_q, cfg)
    flux = central_upwind_flux(recon.h_minus, recon.q_minus,
                               recon.h_plus, recon.q_plus, gs.g)
    source_q = bed_source(recon, gs)
    dx = gs.dx[gs.interior]
    dh_dt = -(flux.f_h[1:] - flux.f_h[:-1]) / dx
    dq_dt = -(flux.f_q[1:] - flux.f_q[:-1]) / dx + source_q
    return RhsData(dh_dt=dh_dt, dq_dt=dq_dt, source_q=source_q,
                   flux=flux, recon=recon)
