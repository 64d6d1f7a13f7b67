"""Frequency cascade and the logarithmic stability modulus."""

import math

import numpy as np
import pytest

from wavecert.errors import (
    AlphaOutOfRange,
    NonPositiveInput,
    ParameterOrder,
    ZeroSolutionNorm,
)
from wavecert.logspace import LogScalar, softplus_ln
from wavecert.stability import (
    CascadeSchedule,
    StabilityModulus,
    TimeGap,
    cascade,
    cascade_lower_bound,
    cascade_threshold,
    modulus,
    optimal_time_gap,
)


def test_cascade_reference_fixture():
    assert cascade_threshold(0.5, 0.5, 3) == 256.0  # exact
    s = cascade(256.0, 0.5, 0.5, 1.0, 3)
    assert s.mu_list == (256.0, 8.0, pytest.approx(math.sqrt(2.0), rel=1e-15))
    assert s.mu_final >= 1.0
    assert not s.below_one
    assert s.omega == pytest.approx(s.mu_final**0.5 / 3.0, rel=1e-15)


def test_cascade_above_one_on_random_tuples():
    rng = np.random.default_rng(20260822)
    drawn = 0
    while drawn < 100:
        alpha = float(rng.uniform(0.1, 0.9))
        c156 = float(rng.uniform(0.01, 0.99))
        n_balls = int(rng.integers(1, 9))
        # keep the tuple in double range so mu itself is representable
        ln_c159 = -math.log(c156) / (alpha ** (n_balls - 1) * (1.0 - alpha))
        if ln_c159 > 600.0:
            continue
        drawn += 1
        c159 = cascade_threshold(c156, alpha, n_balls)
        mu = c159 * float(1.0 + rng.uniform(0.0, 3.0))
        s = cascade(mu, alpha, c156, 1.0, n_balls)
        assert s.mu_final >= 1.0 - 1e-12, (alpha, c156, n_balls, mu, s.mu_list)
        assert not s.below_one or s.mu_final >= 1.0 - 1e-12


def test_cascade_threshold_saturates_closed_form_bound():
    # the closed-form ladder floor equals exactly 1 at mu = c159
    for c156, alpha, n_balls in ((0.5, 0.5, 3), (0.3, 0.7, 4), (0.9, 0.25, 2)):
        c159 = cascade_threshold(c156, alpha, n_balls)
        lb = cascade_lower_bound(c159, alpha, c156, n_balls)
        assert lb == pytest.approx(1.0, rel=1e-10)


def test_cascade_far_below_threshold_bottoms_out():
    s = cascade(2.0, 0.5, 0.5, 1.0, 3)
    assert s.mu_final < 1.0
    assert s.below_one


def test_cascade_threshold_overflow_is_clean():
    from wavecert.errors import Overflow

    with pytest.raises(Overflow):
        cascade_threshold(0.01, 0.1, 8)


def test_cascade_lower_bound_property():
    rng = np.random.default_rng(7)
    for _ in range(50):
        alpha = float(rng.uniform(0.2, 0.8))
        c156 = float(rng.uniform(0.05, 0.95))
        mu = float(rng.uniform(1.0, 1e6))
        s = cascade(mu, alpha, c156, 1.0, 6)
        for j, mu_j in enumerate(s.mu_list, start=1):
            lb = cascade_lower_bound(mu, alpha, c156, j)
            assert mu_j >= lb * (1.0 - 1e-12), (alpha, c156, mu, j)


def test_cascade_validation():
    with pytest.raises(AlphaOutOfRange):
        cascade(10.0, 1.0, 0.5, 1.0, 3)
    with pytest.raises(NonPositiveInput):
        cascade(-1.0, 0.5, 0.5, 1.0, 3)
    with pytest.raises(NonPositiveInput):
        cascade(10.0, 0.5, 0.5, 1.0, 0)
    with pytest.raises(ParameterOrder):
        cascade_threshold(1.5, 0.5, 3)
    with pytest.raises(NonPositiveInput):
        cascade_lower_bound(10.0, 0.5, 0.5, 0)


def test_modulus_reference_point():
    c = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0))
    # u = 1, Pu = e^-100: bound = 10 / ln(1 + e^100)^0.5 = 10/10 = 1
    val = modulus(1.0, math.exp(-100.0), c)
    assert val == pytest.approx(1.000, abs=1e-6)


def test_modulus_case_split_continuity_one_ulp():
    # with c158 = 0 the prefactor collapses to softplus(c159)^theta and the
    # bound at the threshold ratio equals u exactly: the trivial Case-A cap
    # and the Case-B formula agree to the last ulp in log space
    theta = 0.5
    c159_val = 5.0  # Case A <=> ln(u/Pu) <= c159
    c160_ln = theta * math.log(softplus_ln(c159_val))
    c = StabilityModulus(c160=LogScalar(c160_ln), theta=theta, c159=LogScalar.of(c159_val))
    u = 3.7
    pu_at = u * math.exp(-c159_val)
    # safely inside each branch (the exact boundary is rounding-sensitive)
    assert c.case_of(u, u * math.exp(-c159_val + 0.1)) == "A"
    assert c.case_of(u, u * math.exp(-c159_val - 0.1)) == "B"
    val = modulus(u, pu_at, c)
    assert math.log(val) == pytest.approx(math.log(u), abs=4e-16)
    # continuity across the split: nudging pu by one ulp moves the bound by < 1e-13
    lo = modulus(u, math.nextafter(pu_at, 0.0), c)
    hi = modulus(u, math.nextafter(pu_at, math.inf), c)
    assert abs(math.log(lo) - math.log(hi)) < 1e-13


def test_modulus_case_classification():
    c = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(3.0))
    u = 1.0
    assert c.case_of(u, u * math.exp(-2.0)) == "A"
    assert c.case_of(u, u * math.exp(-4.0)) == "B"
    assert c.case_of(u, 0.0) == "B"
    with pytest.raises(ZeroSolutionNorm):
        c.case_of(0.0, 1.0)


def test_modulus_monotone_in_residual():
    c = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0))
    # exponents within double range: exp(-745) is the subnormal floor
    bounds = [modulus(1.0, math.exp(-k), c) for k in (10.0, 100.0, 400.0, 700.0)]
    assert all(bounds[i] > bounds[i + 1] for i in range(len(bounds) - 1))


def test_modulus_extreme_ratio_no_overflow():
    c = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0))
    # ratio e^100000 evaluated entirely in log space
    val = modulus(1.0, 0.0, c)
    assert val == 0.0
    tiny = modulus(1.0, math.exp(-700.0), c)
    assert 0.0 < tiny < 1.0
    assert tiny == pytest.approx(10.0 / 700.0**0.5, rel=1e-12)


def test_modulus_weak_norm_variant():
    full = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0))
    half = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0), m=0.5)
    u, pu = 2.0, 1e-30
    v_full = modulus(u, pu, full)
    v_half = modulus(u, pu, half)
    # the m-variant interpolates: c160^m u / L^(m theta) = u^(1-m) (c160 u / L^theta)^m
    want = u ** 0.5 * v_full**0.5
    assert v_half == pytest.approx(want, rel=1e-12)


def test_modulus_input_validation():
    c = StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0))
    with pytest.raises(NonPositiveInput):
        modulus(-1.0, 1.0, c)
    with pytest.raises(ZeroSolutionNorm):
        modulus(0.0, 1.0, c)
    assert modulus(0.0, 0.0, c) == 0.0
    with pytest.raises(AlphaOutOfRange):
        StabilityModulus(c160=LogScalar.of(10.0), theta=1.5, c159=LogScalar.of(50.0))
    with pytest.raises(AlphaOutOfRange):
        StabilityModulus(c160=LogScalar.of(10.0), theta=0.5, c159=LogScalar.of(50.0), m=0.0)


def test_modulus_accepts_plain_floats():
    c = StabilityModulus(c160=10.0, theta=0.5, c159=50.0)
    assert isinstance(c.c160, LogScalar)
    assert modulus(1.0, math.exp(-100.0), c) == pytest.approx(1.0, abs=1e-6)


def test_optimal_time_gap():
    g = optimal_time_gap(0.5, 0.1, 0.15)
    assert isinstance(g, TimeGap)
    assert g.t_opt == pytest.approx(0.4, rel=1e-15)
    assert g.certified_time == pytest.approx(0.55, rel=1e-15)
    with pytest.raises(ParameterOrder):
        optimal_time_gap(0.5, 0.1, 0.5)
    with pytest.raises(NonPositiveInput):
        optimal_time_gap(-0.5, 0.1, 0.1)


def test_cascade_schedule_is_frozen_record():
    s = cascade(16.0, 0.5, 0.5, 1.0, 2)
    assert isinstance(s, CascadeSchedule)
    with pytest.raises(Exception):
        s.mu = 1.0
