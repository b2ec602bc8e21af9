"""Shock/drying detector measures: oracle values, conventions, and orders."""

import numpy as np
import pytest

from swe1d.detectors import (DetectorOutput, compute_detectors, delta_flux,
                             delta_lambda, kappa, scheme_suppressors,
                             swe_eigensystem, theta_combine, theta_positive,
                             theta_shock)
from swe1d.mesh import N_GHOST, GhostedState
from swe1d.reconstruction import Scheme, SchemeConfig


def _ghosted(h, q, dx, b_center=None, db_cell=None, g=1.0, x_ref=1.0,
             t=0.0):
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    n = h.size
    dx = np.full(n, dx) if np.isscalar(dx) else np.asarray(dx, dtype=float)
    if b_center is None:
        b_center = np.zeros(n)
    if db_cell is None:
        db_cell = np.zeros(n)
    return GhostedState(h=h, q=q, dx=dx, b_center=np.asarray(b_center, float),
                        db_cell=np.asarray(db_cell, float), x_ref=x_ref,
                        t=t, g=g)


def test_eigensystem_rows_are_left_eigenvectors():
    rng = np.random.default_rng(20260822)
    h = rng.uniform(1e-3, 10.0, size=200)
    q = rng.uniform(-5.0, 5.0, size=200)
    g = 1.0
    eig = swe_eigensystem(h, q, g)
    u = q / h
    c = np.sqrt(g * h)
    np.testing.assert_allclose(eig.lam[:, 0], u - c)
    np.testing.assert_allclose(eig.lam[:, 1], u + c)
    for n in range(h.size):
        a = np.array([[0.0, 1.0],
                      [g * h[n] - u[n] ** 2, 2.0 * u[n]]])
        for m in range(2):
            resid = eig.l[n, m] @ a - eig.lam[n, m] * eig.l[n, m]
            assert np.max(np.abs(resid)) <= 1e-10 * max(1.0, abs(eig.lam[n, m]))


def test_eigensystem_dry_convention():
    eig = swe_eigensystem(np.array([0.0, 1.0]), np.array([0.0, 0.5]), 1.0)
    np.testing.assert_array_equal(eig.lam[0], 0.0)
    np.testing.assert_array_equal(eig.l[0], np.eye(2))


def test_delta_lambda_oracle():
    # Drops of 0.5 over spacing 0.01 with p1 = 1/2: 0.5 / 0.01**0.5 = 5.
    lam = np.array([1.0, 0.5, 0.0])
    dx_mid = np.array([0.01, 0.01])
    out = delta_lambda(lam, dx_mid, p1=0.5, lambda_ref=1.0, x_ref=1.0)
    np.testing.assert_allclose(out, [0.0, 5.0, 0.0])


def test_delta_lambda_reference_scaling():
    lam = np.array([1.0, 0.5, 0.0])
    dx_mid = np.array([0.01, 0.01])
    out = delta_lambda(lam, dx_mid, p1=0.5, lambda_ref=2.0, x_ref=4.0)
    # Multiplied by x_ref**p1 / lambda_ref = 2 / 2 = 1.
    np.testing.assert_allclose(out[1], 5.0)


def test_delta_lambda_zero_for_nondecreasing_speeds():
    lam = np.array([0.0, 0.5, 1.0, 1.0])
    out = delta_lambda(lam, np.full(3, 0.1), p1=0.5, lambda_ref=1.0,
                       x_ref=1.0)
    np.testing.assert_array_equal(out, 0.0)


def test_theta_shock_oracle_and_limits():
    assert theta_shock(np.array([1.0]), np.array([1.0]), 2.0, 1.0)[0] \
        == pytest.approx(0.75)
    # Either measure vanishing disarms the detector completely.
    assert theta_shock(np.array([0.0]), np.array([50.0]), 2.0, 1.0)[0] == 1.0
    assert theta_shock(np.array([50.0]), np.array([0.0]), 2.0, 1.0)[0] == 1.0
    # Both measures huge drive it to 0.
    assert theta_shock(np.array([np.inf]), np.array([np.inf]),
                       2.0, 1.0)[0] == 0.0


def test_theta_shock_bounds():
    rng = np.random.default_rng(7)
    d1 = 10.0 ** rng.uniform(-8, 8, size=500)
    d2 = 10.0 ** rng.uniform(-8, 8, size=500)
    th = theta_shock(d1, d2, 2.0, 1.0)
    assert np.all(th >= 0.0) and np.all(th <= 1.0)


def test_theta_positive_oracle():
    # Neighbour 1e4 times deeper, K = 100, p4 = 2: (100/1e4)**2 = 1e-4.
    th = theta_positive(np.array([1e4]), np.array([1.0]), np.array([1.0]),
                        100.0, 100.0, 2.0)
    assert th[0] == pytest.approx(1e-4, rel=1e-12)


def test_theta_positive_dry_conventions():
    # 0/0 -> 0 keeps fully dry neighbourhoods at zero gradient; a wet cell
    # next to a dry one has ratio inf and is uncapped.
    th = theta_positive(np.array([0.0, 0.0]), np.array([0.0, 1.0]),
                        np.array([0.0, 1.0]), 100.0, 100.0, 2.0)
    np.testing.assert_allclose(th, [0.0, 1.0])


def test_kappa_oracle():
    k = kappa(np.array([1.0]), np.array([0.5]), np.array([1.0]),
              1.01, 1.01)
    assert k[0] == pytest.approx(0.505, rel=1e-12)


def test_theta_combine_is_elementwise_min():
    tf = np.array([[0.5, 0.9], [1.0, 1.0]])
    tp = np.array([[0.7], [0.2]])
    np.testing.assert_allclose(theta_combine(tf, tp), [0.5, 0.2])


def test_detector_output_bounds_validated():
    ones = np.ones((3, 1))
    with pytest.raises(ValueError):
        DetectorOutput(theta=np.array([0.0, 1.5, 0.0]),
                       theta_field=ones, theta_pos=ones,
                       delta_lam=ones, delta_flux=ones)


def test_delta_flux_conventions():
    lam = np.array([1.0, 1.0, 1.0])
    l_rows = np.tile(np.array([0.5, 1.0]), (3, 1))
    dx_mid = np.array([0.1, 0.1])
    # Constant state: zero jumps under zero source stay 0 (0/0 rule).
    out = delta_flux(lam, l_rows, np.zeros((3, 2)), np.zeros((2, 2)),
                     dx_mid, 0.5, 1.0)
    np.testing.assert_array_equal(out, 0.0)
    # A nonzero jump with no source to balance it reads as pure flux
    # imbalance: +inf.
    dq = np.array([[0.5, 0.0], [0.0, 0.0]])
    out = delta_flux(lam, l_rows, np.zeros((3, 2)), dq, dx_mid, 0.5, 1.0)
    assert out[1] == np.inf


def test_compute_detectors_constant_state_is_transparent():
    gs = _ghosted(np.full(9, 2.0), np.full(9, 0.3), dx=0.1)
    det = compute_detectors(gs, SchemeConfig(scheme=Scheme.SKT))
    np.testing.assert_array_equal(det.theta, 1.0)


def test_compute_detectors_end_cells_forced_transparent():
    rng = np.random.default_rng(3)
    gs = _ghosted(rng.uniform(0.5, 2.0, 9), rng.uniform(-1, 1, 9), dx=0.1)
    det = compute_detectors(gs, SchemeConfig(scheme=Scheme.SKT))
    assert det.theta[0] == 1.0 and det.theta[-1] == 1.0


def _smooth_ghosted(n_cells: int) -> GhostedState:
    # Generic smooth non-equilibrium profile on [0, 1]. The bed slope is
    # constant and nonzero so the flux-to-source ratio never degenerates;
    # where the source vanishes that ratio saturates and the suppression
    # drops an order.
    n = n_cells + 2 * N_GHOST
    dx = 1.0 / n_cells
    x_iface = (np.arange(n + 1) - N_GHOST) * dx
    x_c = 0.5 * (x_iface[:-1] + x_iface[1:])
    b_iface = 0.3 * x_iface
    h = 1.2 + 0.3 * np.sin(2.0 * np.pi * x_c)
    q = 0.1 * np.cos(2.0 * np.pi * x_c)
    return GhostedState(h=h, q=q, dx=np.full(n, dx),
                        b_center=0.5 * (b_iface[:-1] + b_iface[1:]),
                        db_cell=np.diff(b_iface), x_ref=1.0, t=0.0, g=1.0)


def test_smooth_profile_suppression_is_second_order():
    cfg = SchemeConfig(scheme=Scheme.SKT)
    sizes = np.array([100, 200, 400, 800])
    worst = []
    for n_cells in sizes:
        det = compute_detectors(_smooth_ghosted(n_cells), cfg)
        worst.append(np.max(1.0 - det.theta[5:-5]))
    slope = np.polyfit(np.log(1.0 / sizes), np.log(worst), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.3)


def _jump_ghosted(n_cells: int) -> GhostedState:
    # A single stationary-frame jump at x = 0 in the middle of [-1, 1].
    n = n_cells + 2 * N_GHOST
    dx = 2.0 / n_cells
    x_iface = -1.0 + (np.arange(n + 1) - N_GHOST) * dx
    x_c = 0.5 * (x_iface[:-1] + x_iface[1:])
    left = x_c < 0.0
    h = np.where(left, 0.1, 1.0)
    q = np.where(left, 0.1 * 2.2452, 1.0 * 0.1345)
    return GhostedState(h=h, q=q, dx=np.full(n, dx),
                        b_center=np.zeros(n), db_cell=np.zeros(n),
                        x_ref=2.0, t=0.0, g=1.0)


def test_jump_cell_suppression_is_first_order():
    cfg = SchemeConfig(scheme=Scheme.SKT)
    sizes = np.array([100, 200, 400, 800])
    worst = []
    for n_cells in sizes:
        det = compute_detectors(_jump_ghosted(n_cells), cfg)
        worst.append(np.min(det.theta))
    slope = np.polyfit(np.log(2.0 / sizes), np.log(worst), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.3)


def test_scheme_suppressors_dispatch():
    rng = np.random.default_rng(11)
    gs = _ghosted(rng.uniform(0.2, 2.0, 9), rng.uniform(-0.5, 0.5, 9),
                  dx=0.125, x_ref=1.0)
    det = compute_detectors(gs, SchemeConfig(scheme=Scheme.SKT))

    th_h, th_q = scheme_suppressors(gs, SchemeConfig(scheme=Scheme.SKT))
    np.testing.assert_array_equal(th_h, det.theta)
    np.testing.assert_array_equal(th_q, det.theta)

    for scheme in (Scheme.KU02, Scheme.KU07, Scheme.CH15,
                   Scheme.PLAIN_MINMOD, Scheme.PIECEWISE_CONSTANT):
        th_h, th_q = scheme_suppressors(gs, SchemeConfig(scheme=scheme))
        np.testing.assert_array_equal(th_h, 1.0)
        np.testing.assert_array_equal(th_q, 1.0)


def test_scheme_suppressors_velocity_bounding_variant():
    gs = _ghosted(np.array([1.0, 1.0, 0.5, 1.0, 1.0]),
                  np.zeros(5), dx=0.1, x_ref=1.0)
    cfg = SchemeConfig(scheme=Scheme.SKK)
    th_h, th_q = scheme_suppressors(gs, cfg)
    np.testing.assert_array_equal(th_h, 1.0)
    k = 1.0 + cfg.k_skk_coeff * 0.1 / 1.0
    expected = kappa(gs.h[:-2], gs.h[1:-1], gs.h[2:], k, k)
    np.testing.assert_allclose(th_q[1:-1], expected)
    assert th_q[2] == pytest.approx(k * 0.5)
