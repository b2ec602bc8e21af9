"""Shock and drying detectors driving the gradient suppressor.

The suppressor Theta in [0, 1] multiplies reconstructed gradients: 1 keeps
the piecewise-linear reconstruction, 0 degrades it to piecewise-constant.
A cell is treated as holding a shock when, in some characteristic field,
(a) the characteristic speed drops steeply across it and (b) the flux
gradient dominates the source term. A separate ratio test caps gradients
in cells that are orders of magnitude shallower than a neighbour, which
bounds the reconstructed velocities near drying fronts.

Division conventions used throughout: x/0 = +inf for x > 0 and 0/0 = 0.
Infinities are propagated as IEEE values, never as finite sentinels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import GhostedState


@dataclass(frozen=True)
class SystemSpec:
    """Hyperbolic-system shape: field count and which fields must stay >= 0."""

    n_fields: int = 2
    positive_fields: tuple[int, ...] = (0,)


SWE_SYSTEM = SystemSpec(n_fields=2, positive_fields=(0,))


@dataclass
class EigenData:
    """Per-cell eigenvalues and left eigenvector rows, slowest field first.

    lam[n, m] is the m-th characteristic speed in cell n; l[n, m, :] the
    matching left eigenvector row.
    """

    lam: np.ndarray
    l: np.ndarray


@dataclass
class DetectorOutput:
    theta: np.ndarray        # combined suppressor, padded length, ends = 1
    theta_field: np.ndarray  # (n, M) per characteristic field
    theta_pos: np.ndarray    # (n, #positive fields) ratio caps
    delta_lam: np.ndarray    # (n, M) speed-convergence measures
    delta_flux: np.ndarray   # (n, M) flux-vs-source measures

    def __post_init__(self) -> None:
        for arr in (self.theta, self.theta_field, self.theta_pos):
            if np.any(arr < -1e-15) or np.any(arr > 1 + 1e-15):
                raise ValueError("suppressor values must lie in [0, 1]")


def swe_eigensystem(h: np.ndarray, q: np.ndarray, g: float) -> EigenData:
    """Characteristic speeds u -+ c and left eigenvectors for shallow water.

    Rows satisfy l . A = lam l for the flux Jacobian A. Dry cells (h = 0)
    are assigned zero speeds and unit rows by convention; the Jacobian is
    defective there and no true eigenbasis exists.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    n = h.size
    wet = h > 0
    u = np.zeros(n)
    np.divide(q, h, out=u, where=wet)
    c = np.sqrt(g * np.where(wet, h, 0.0))

    lam = np.stack([u - c, u + c], axis=1)
    l = np.empty((n, 2, 2))
    l[:, 0, 0] = -(u + c)
    l[:, 0, 1] = 1.0
    l[:, 1, 0] = c - u
    l[:, 1, 1] = 1.0
    if not wet.all():
        dry = ~wet
        lam[dry] = 0.0
        l[dry] = np.eye(2)
    return EigenData(lam=lam, l=l)


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """|num|/|den| with nonzero/0 -> +inf and 0/0 -> 0."""
    num = np.abs(np.asarray(num, dtype=float))
    den = np.abs(np.asarray(den, dtype=float))
    out = np.zeros_like(num)
    zero_den = den == 0.0
    with np.errstate(over="ignore"):
        np.divide(num, den, out=out, where=~zero_den)
    out[zero_den & (num > 0)] = np.inf
    return out


def delta_lambda(lam: np.ndarray, dx_mid: np.ndarray, p1: float,
                 lambda_ref: float, x_ref: float) -> np.ndarray:
    """Dimensionless one-sided speed-drop measure for one field.

    Positive only where the characteristic speed decreases towards the
    right on either side of the cell; O(dx^(1-p1)) for smooth data and
    O(dx^(-p1)) across a genuine speed jump. End cells get 0.
    """
    lam = np.asarray(lam, dtype=float)
    dx_mid = np.asarray(dx_mid, dtype=float)
    out = np.zeros_like(lam)
    drop_l = (lam[:-2] - lam[1:-1]) / dx_mid[:-1] ** p1
    drop_r = (lam[1:-1] - lam[2:]) / dx_mid[1:] ** p1
    out[1:-1] = (x_ref ** p1 / lambda_ref) * np.maximum(
        np.maximum(drop_l, drop_r), 0.0)
    return out


def delta_flux(lam: np.ndarray, l_rows: np.ndarray, psi_prime: np.ndarray,
               dq_iface: np.ndarray, dx_mid: np.ndarray, p1: float,
               x_ref: float) -> np.ndarray:
    """Flux-gradient-to-source ratio for one field.

    For each cell the four combinations of (own / neighbouring eigenpair)
    with (left / right interface jump) are formed; the largest ratio wins.
    A zero source under a nonzero projected jump gives +inf: gradients
    there are pure flux imbalance, the strongest shock signal.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.size
    # Projections of the interface jumps onto each cell's eigenrow.
    proj_right = np.einsum("nk,nk->n", l_rows[:-1], dq_iface)   # l_c . dQ_{c+1/2}
    proj_left = np.einsum("nk,nk->n", l_rows[1:], dq_iface)     # l_c . dQ_{c-1/2}
    den = np.abs(np.einsum("nk,nk->n", l_rows, psi_prime))

    scale_l = dx_mid[:-1] ** p1
    scale_r = dx_mid[1:] ** p1
    # Terms for cell j: (j-1, left iface), (j, left iface), (j, right iface),
    # (j+1, right iface). proj_right[c] pairs cell c with its right interface,
    # proj_left[c] with its left one.
    t1 = _safe_ratio(lam[:-2] * proj_right[:-1] / scale_l, den[:-2])
    t2 = _safe_ratio(lam[1:-1] * proj_left[:-1] / scale_l, den[1:-1])
    t3 = _safe_ratio(lam[1:-1] * proj_right[1:] / scale_r, den[1:-1])
    t4 = _safe_ratio(lam[2:] * proj_left[1:] / scale_r, den[2:])

    out = np.zeros(n)
    out[1:-1] = x_ref ** (p1 - 1.0) * np.maximum(
        np.maximum(t1, t2), np.maximum(t3, t4))
    return out


def theta_shock(dlam: np.ndarray, dflux: np.ndarray, p2: float,
                p3: float) -> np.ndarray:
    """Suppressor for one characteristic field.

    Close to 1 unless both measures are large; 1 - O(dx^(2 p2 p3 (1-p1)))
    in smooth regions and O(dx^(p1 p2)) at shocks for the default powers.
    """
    with np.errstate(divide="ignore", over="ignore"):
        a = np.power(np.asarray(dlam, dtype=float), -p2)
        b = np.power(np.asarray(dflux, dtype=float), -p2)
    return 1.0 - (a + 1.0) ** (-p3) * (b + 1.0) ** (-p3)


def theta_positive(v_prev: np.ndarray, v: np.ndarray, v_next: np.ndarray,
                   k_plus: np.ndarray | float, k_minus: np.ndarray | float,
                   p4: float) -> np.ndarray:
    """Ratio cap for a positive field: small when a neighbour is far deeper.

    min(1, (K+ v/v_prev)^p4, (K- v/v_next)^p4) with the 0/0 -> 0 rule, so a
    dry cell flanked by dry cells gets 0 and keeps a zero gradient.
    """
    with np.errstate(over="ignore"):
        r_prev = _safe_ratio(v, v_prev) * k_plus
        r_next = _safe_ratio(v, v_next) * k_minus
    with np.errstate(over="ignore"):
        capped = np.minimum(r_prev, r_next) ** p4
    return np.minimum(1.0, capped)


def kappa(h_prev: np.ndarray, h: np.ndarray, h_next: np.ndarray,
          k_plus: np.ndarray | float,
          k_minus: np.ndarray | float) -> np.ndarray:
    """First-power depth-ratio cap used by the velocity-bounding variant."""
    return theta_positive(h_prev, h, h_next, k_plus, k_minus, p4=1.0)


def theta_combine(theta_fields: np.ndarray,
                  theta_pos: np.ndarray) -> np.ndarray:
    """Final suppressor: worst case over all field and positivity measures."""
    return np.minimum(theta_fields.min(axis=1), theta_pos.min(axis=1))


def source_derivative(gs: GhostedState) -> np.ndarray:
    """Cell-centred geometric source estimate (0, -g h db/dx) per cell.

    Computable before reconstruction, which is what the detector needs:
    it only asks whether flux gradients dominate the source, not for the
    well-balanced source itself.
    """
    n = gs.n_padded
    psi = np.zeros((n, 2))
    psi[:, 1] = -gs.g * gs.h * gs.db_cell / gs.dx
    return psi


def compute_detectors(gs: GhostedState, cfg) -> DetectorOutput:
    """Evaluate the full detector stack on a padded state.

    `cfg` is a SchemeConfig; only the exponents, K, and reference scales
    are read here. The first and last padded cells have no complete
    stencil and are forced to theta = 1.
    """
    eig = swe_eigensystem(gs.h, gs.q, gs.g)
    psi = source_derivative(gs)
    dq = np.stack([np.diff(gs.h), np.diff(gs.q)], axis=1)
    dx_mid = gs.dx_mid
    x_ref = cfg.x_ref if cfg.x_ref is not None else gs.x_ref

    n = gs.n_padded
    m_fields = eig.lam.shape[1]
    dlam = np.zeros((n, m_fields))
    dflux = np.zeros((n, m_fields))
    th_field = np.ones((n, m_fields))
    for m in range(m_fields):
        dlam[:, m] = delta_lambda(eig.lam[:, m], dx_mid, cfg.p1,
                                  cfg.lambda_ref, x_ref)
        dflux[:, m] = delta_flux(eig.lam[:, m], eig.l[:, m, :], psi, dq,
                                 dx_mid, cfg.p1, x_ref)
        th_field[1:-1, m] = theta_shock(dlam[1:-1, m], dflux[1:-1, m],
                                        cfg.p2, cfg.p3)

    fields = (gs.h, gs.q)
    th_pos = np.ones((n, len(SWE_SYSTEM.positive_fields)))
    for i, mf in enumerate(SWE_SYSTEM.positive_fields):
        v = fields[mf]
        th_pos[1:-1, i] = theta_positive(v[:-2], v[1:-1], v[2:],
                                         cfg.k_detector, cfg.k_detector,
                                         cfg.p4)

    theta = np.ones(n)
    theta[1:-1] = theta_combine(th_field[1:-1], th_pos[1:-1])
    return DetectorOutput(theta=theta, theta_field=th_field,
                          theta_pos=th_pos, delta_lam=dlam,
                          delta_flux=dflux)


def scheme_suppressors(gs: GhostedState, cfg) -> tuple[np.ndarray, np.ndarray]:
    """Per-scheme choice of depth and discharge gradient suppressors.

    Returns padded (theta_h, theta_q). The full detector stack backs the
    SkT variant; SkK caps only the discharge gradient by the depth-ratio
    measure with K barely above 1; every other variant reconstructs with
    unsuppressed gradients.
    """
    from .reconstruction import Scheme  # local import to avoid a cycle

    n = gs.n_padded
    ones = np.ones(n)
    if cfg.scheme == Scheme.SKT:
        det = compute_detectors(gs, cfg)
        return det.theta, det.theta
    if cfg.scheme == Scheme.SKK:
        x_ref = cfg.x_ref if cfg.x_ref is not None else gs.x_ref
        k = 1.0 + cfg.k_skk_coeff * gs.dx[1:-1] / x_ref
        th_q = ones.copy()
        th_q[1:-1] = kappa(gs.h[:-2], gs.h[1:-1], gs.h[2:], k, k)
        return ones, th_q
    return ones, ones
