"""Influence domains, level-set gap, recentering, pseudoconvexity reports."""

import math

import numpy as np
import pytest

from wavecert.domains import (
    HyperbolicFunction,
    check_inclusions,
    empirical_level_gap,
    influence_sets,
    lambda_omega0_separation,
    level_set_gap,
    omega_sets,
    psi_eval,
    psi_regularity_report,
    recenter,
    t_ell_gamma,
)
from wavecert.errors import EmptyRegion, GeometryViolated, ParameterOrder
from wavecert.metric import geodesic_distance, identity_metric

ELL, T, GAMMA = 0.1, 0.5, 0.15


def test_t_ell_gamma_reference_value():
    assert t_ell_gamma(2.0, 0.25, 0.5) == pytest.approx(1.9271, abs=1e-4)
    # closed form
    assert t_ell_gamma(2.0, 0.25, 0.5) == pytest.approx(
        math.sqrt(1.75**2 - 0.25) + 0.25, rel=1e-15
    )
    with pytest.raises(ParameterOrder):
        t_ell_gamma(1.0, 0.5, 0.6)


def test_level_set_gap_reference_value():
    assert level_set_gap(2.0, 0.25, 0.5) == pytest.approx(0.017857, abs=1e-4)
    assert level_set_gap(2.0, 0.25, 0.5) == pytest.approx(0.5**2 / (8.0 * 1.75), rel=1e-15)
    with pytest.raises(ParameterOrder):
        level_set_gap(0.5, 0.5, 0.1)
    with pytest.raises(ParameterOrder):
        level_set_gap(2.0, 0.25, 1.8)


def test_psi_formula_on_nodes(ident_sets_129):
    sets = ident_sets_129
    d = sets.geo.d
    tt = sets.times.reshape((-1,) + (1,) * d.ndim)
    expected = (T - d[None, ...]) ** 2 - tt**2
    assert np.allclose(sets.psi, expected, rtol=0.0, atol=1e-12)


def test_mask_definitions_match_direct_formulas(ident_sets_129):
    sets = ident_sets_129
    d = sets.geo.d[None, ...]
    abs_t = np.abs(sets.times).reshape((-1,) + (1,) * sets.geo.d.ndim)
    horizon = abs_t <= T - ELL
    w = horizon & (d <= ELL)
    s = horizon & (sets.psi >= GAMMA**2) & (d <= T)
    assert np.array_equal(sets.w_set, np.broadcast_to(w, sets.psi.shape))
    assert np.array_equal(sets.s_set, s)
    assert np.array_equal(sets.lam, s & ~w)
    # the Sigma family are the influence cylinders, not superlevel sets
    assert np.array_equal(sets.sigma, horizon & (abs_t <= T - d))
    t_mid = t_ell_gamma(T, ELL, GAMMA)
    assert np.array_equal(sets.sigma_middle, (abs_t <= t_mid - ELL) & (abs_t <= t_mid - d))
    s_half = horizon & (sets.psi >= GAMMA**2 / 2.0) & (d <= T)
    assert np.array_equal(sets.omega0, s_half & (d >= ELL / 4.0))


def test_set_chain_is_nested(ident_sets_129):
    sets = ident_sets_129
    # the cylinder family is nested (horizons T - gamma <= T_{l,gamma} <= T)
    assert np.all(sets.sigma_inner <= sets.sigma_middle)
    assert np.all(sets.sigma_middle <= sets.sigma)
    assert np.all(sets.w_set <= sets.sigma)
    # each link of the inclusion chain is nonempty on the default fixture
    assert sets.sigma_inner.any()
    assert sets.omega0.any()
    assert sets.lam.any()
    assert sets.t_lg == pytest.approx(t_ell_gamma(T, ELL, GAMMA), rel=1e-15)


def test_check_inclusions_zero_violations(ident_sets_129):
    rep = check_inclusions(ident_sets_129, n_samples=20000, seed=0)
    # three chain clauses, each checked on nodes and continuum samples
    assert rep.node_violations == (0, 0, 0)
    assert rep.sample_violations == (0, 0, 0)
    assert rep.cylinder_violations == 0
    assert rep.n_samples == 20000
    assert rep.t_lg == pytest.approx(t_ell_gamma(T, ELL, GAMMA), rel=1e-15)
    assert len(rep.violating_points) == 0


def test_check_inclusions_deterministic(ident_sets_129):
    a = check_inclusions(ident_sets_129, n_samples=5000, seed=7)
    b = check_inclusions(ident_sets_129, n_samples=5000, seed=7)
    assert a == b


def test_empirical_gap_dominates_certified(ident_sets_129):
    rep = empirical_level_gap(ident_sets_129)
    h = max(ident_sets_129.geo.metric.spacing)
    assert rep.c180 == pytest.approx(level_set_gap(T, ELL, GAMMA), rel=1e-15)
    assert rep.empirical_min >= rep.c180 - 2.0 * h
    assert rep.ok


def test_lambda_omega0_separation(ident_sets_129):
    rep = lambda_omega0_separation(ident_sets_129)
    assert rep.n_inner > 0
    assert rep.n_boundary > 0
    assert rep.measured >= rep.bound - rep.tol
    assert rep.ok


def test_influence_sets_parameter_validation(ident_geo_129):
    times = np.linspace(-T, T, 17)
    with pytest.raises(ParameterOrder):
        influence_sets(ident_geo_129, times, 0.3, 0.2, 0.05)  # T <= ell
    with pytest.raises(ParameterOrder):
        influence_sets(ident_geo_129, times, ELL, T, 0.9)  # gamma > T - ell
    with pytest.raises(GeometryViolated):
        # i0/4 = 0.225 < ell
        influence_sets(ident_geo_129, times, 0.3, 0.5, 0.1, enforce_small_cylinder=True)


def test_recenter_case_a_inside_core(ident_geo_129):
    res = recenter(ident_geo_129, T, (0.05, 0.0), ell=ELL, gamma=GAMMA)
    assert res.case == "a"
    assert np.allclose(res.z_hat, (0.0, 0.0))
    assert res.T_hat == pytest.approx(T)
    assert res.path is None


def test_recenter_case_b_outer_point(ident_geo_129):
    # d(x_hat) = 1.0 > 7 i0/8 = 0.7875: recenter onto the geodesic
    res = recenter(ident_geo_129, 1.2, (1.0, 0.0), ell=ELL, gamma=GAMMA)
    assert res.case == "b"
    assert res.d_origin == pytest.approx(1.0, abs=0.02)
    # new center sits on the minimizing geodesic between origin and target
    assert abs(res.z_hat[1]) < 0.05
    assert 0.0 < res.z_hat[0] < 1.0
    # hyperbolic weight value is preserved at the target
    H_old = HyperbolicFunction(ident_geo_129, 1.2)
    y = (0.0, np.array([1.0, 0.0]))
    val_old = psi_eval(H_old, y)
    val_new = psi_eval(res.psi_hat, y)
    assert val_new == pytest.approx(val_old, abs=2.0 * ident_geo_129.tol)
    # horizon shrinks by the arclength moved
    assert res.T_hat == pytest.approx(1.2 - res.L_hat, rel=1e-12)
    assert res.path is not None


def test_psi_regularity_report_default_region(ident_sets_129, ident_geo_129):
    H = HyperbolicFunction(ident_geo_129, T)
    rep = psi_regularity_report(
        H, ident_sets_129.omega0, ident_sets_129.times, gamma_i=GAMMA / math.sqrt(2.0), ell=ELL
    )
    assert rep.n_nodes > 0
    assert rep.p_ok and rep.grad_ok and rep.derivative_ok
    assert rep.p_min >= rep.p_bound - 1e-9
    assert rep.grad_min >= rep.grad_bound - 1e-9
    assert rep.sup_psi1 > 0.0
    assert rep.sup_psi2 > 0.0
    assert rep.b4 > 0.0
    assert rep.derivative_ok == (True, True, True)


def test_psi_regularity_empty_region(ident_sets_129, ident_geo_129):
    H = HyperbolicFunction(ident_geo_129, T)
    with pytest.raises(EmptyRegion):
        psi_regularity_report(
            H,
            np.zeros_like(ident_sets_129.omega0),
            ident_sets_129.times,
            gamma_i=GAMMA / math.sqrt(2.0),
            ell=ELL,
        )


def test_psi_eval_closed_form(ident_geo_129):
    H = HyperbolicFunction(ident_geo_129, T)
    # at (t, x) = (0.1, (0.3, 0)): psi = (T - d)^2 - t^2 with d ~ 0.3
    val = psi_eval(H, (0.1, np.array([0.3, 0.0])))
    assert val == pytest.approx((T - 0.3) ** 2 - 0.01, abs=0.01)


def test_omega_sets_nested(ident_geo_129):
    times = np.linspace(-T, T, 33)
    om = omega_sets(ident_geo_129, times, T, ELL, GAMMA)
    assert om.nested_ok
    assert np.all(om.omega2 <= om.omega3)
    assert om.omega2.any()


def test_gap_closed_form_scaling():
    # gap scales as gamma^2 and inversely with T - ell
    g1 = level_set_gap(1.0, 0.1, 0.2)
    g2 = level_set_gap(1.0, 0.1, 0.4)
    assert g2 == pytest.approx(4.0 * g1, rel=1e-12)
    g3 = level_set_gap(1.9, 0.1, 0.2)
    assert g3 == pytest.approx(g1 / 2.0, rel=1e-12)
