"""Log-space scalar arithmetic: exactness, stability, ordering."""

import math

import pytest

from wavecert.logspace import (
    LogScalar,
    log_max,
    log_min,
    softplus_ln,
    softplus_of_large,
)


def test_of_and_to_float_roundtrip():
    for v in (1e-300, 1e-12, 0.5, 1.0, 3.25, 1e12, 1e300):
        back = LogScalar.of(v).to_float()
        # relative roundtrip error grows like |ln v| * eps at the range edges
        assert back == pytest.approx(v, rel=1e-12)


def test_zero_and_negative():
    assert LogScalar.of(0.0).to_float() == 0.0
    assert LogScalar.of(0.0).ln == -math.inf
    with pytest.raises(ValueError):
        LogScalar.of(-1.0)


def test_overflow_returns_inf_not_error():
    big = LogScalar(1000.0)
    assert big.to_float() == math.inf
    assert math.isfinite(big.ln)


def test_mantissa_exponent_huge():
    # e^1000 = 1.97007e434
    m, e = LogScalar(1000.0).mantissa_exponent()
    assert e == 434
    assert m == pytest.approx(1.970071114, rel=1e-9)
    m0, e0 = LogScalar.of(0.0).mantissa_exponent()
    assert (m0, e0) == (0.0, 0)


def test_mantissa_in_range_near_power_of_ten():
    for ln in (math.log(10.0) * 300, math.log(10.0) * -250, 0.0):
        m, e = LogScalar(ln).mantissa_exponent()
        assert 1.0 <= m < 10.0


def test_arithmetic_matches_floats_in_range():
    a, b = LogScalar.of(3.0), LogScalar.of(7.0)
    assert (a * b).to_float() == pytest.approx(21.0, rel=1e-15)
    assert (a / b).to_float() == pytest.approx(3.0 / 7.0, rel=1e-15)
    assert (a + b).to_float() == pytest.approx(10.0, rel=1e-14)
    assert (b - a).to_float() == pytest.approx(4.0, rel=1e-14)
    assert (a**2.5).to_float() == pytest.approx(3.0**2.5, rel=1e-14)
    assert (2.0 * a).to_float() == pytest.approx(6.0, rel=1e-15)
    assert (1.0 / a).to_float() == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_arithmetic_beyond_double_range():
    a = LogScalar(800.0)  # e^800, not a double
    b = LogScalar(750.0)
    assert (a * b).ln == 1550.0
    assert (a / b).to_float() == pytest.approx(math.exp(50.0), rel=1e-12)
    # addition is dominated by the larger term
    assert (a + b).ln == pytest.approx(800.0 + math.log1p(math.exp(-50.0)), abs=1e-15)


def test_add_with_zero_identity():
    z = LogScalar.of(0.0)
    a = LogScalar.of(4.0)
    assert (a + z).ln == a.ln
    assert (z + a).ln == a.ln


def test_subtraction_nonpositive_rejected():
    with pytest.raises(ValueError):
        LogScalar.of(1.0) - LogScalar.of(1.0)
    with pytest.raises(ValueError):
        LogScalar.of(1.0) - LogScalar.of(2.0)


def test_pow_zero_guard():
    with pytest.raises(ZeroDivisionError):
        LogScalar.of(0.0) ** -1.0


def test_comparisons_and_mixed_types():
    a = LogScalar.of(2.0)
    assert a > 1.9
    assert a >= 2.0
    assert a < LogScalar.of(2.1)
    assert a <= 2.0
    assert a == 2.0
    assert a == LogScalar.of(2.0)
    assert not (a == "2.0")


def test_log_max_min():
    vals = (LogScalar(500.0), 3.0, LogScalar(-900.0))
    assert log_max(*vals).ln == 500.0
    assert log_min(*vals).ln == -900.0


def test_softplus_ln_branches_agree_at_split():
    # ln(1+e^x) computed on both sides of the x=30 branch point
    lo, hi = softplus_ln(30.0), softplus_ln(math.nextafter(30.0, 31.0))
    assert hi >= lo
    assert hi - lo < 1e-12
    assert softplus_ln(0.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert softplus_ln(-800.0) == 0.0  # underflows cleanly, no error
    assert softplus_ln(800.0) == pytest.approx(800.0, rel=1e-15)


def test_softplus_of_large_huge_argument():
    x = LogScalar(5000.0)  # X = e^5000; ln(1+e^X) == X in double precision
    assert softplus_of_large(x).ln == 5000.0
    small = LogScalar.of(1.0)
    assert small.to_float() == 1.0
    assert softplus_of_large(small).to_float() == pytest.approx(
        math.log(1.0 + math.e), rel=1e-14
    )


def test_hashable_and_frozen():
    a = LogScalar.of(5.0)
    assert hash(a) == hash(LogScalar.of(5.0))
    with pytest.raises(Exception):
        a.ln = 1.0  # frozen dataclass
