"""Gevrey bump profiles and measured frequency-decay constants."""

import math

import numpy as np
import pytest

from wavecert.errors import FitFailed
from wavecert.gevrey import (
    ball_volume,
    bump,
    germ,
    gevrey_q,
    measure_bump,
    smooth_step,
    window,
)


def test_germ_basic_shape():
    s = np.array([-1.0, 0.0, 1e-12, 0.5, 1.0, 10.0])
    g = germ(s, 0.5)
    assert g[0] == 0.0 and g[1] == 0.0
    assert 0.0 <= g[2] < 1e-10  # essential zero of infinite order
    assert g[3] == pytest.approx(math.exp(-2.0), rel=1e-12)  # q = 1 at alpha = 1/2
    assert g[4] == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert np.all(np.diff(g) >= 0.0)


def test_gevrey_q():
    assert gevrey_q(0.5) == pytest.approx(1.0, rel=1e-15)
    assert gevrey_q(0.75) == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(ValueError):
        gevrey_q(1.0)


def test_smooth_step_partition_identity():
    s = np.linspace(-1.0, 2.0, 301)
    f = smooth_step(s, 0.5)
    assert np.all(f[s <= 0.0] == 0.0)
    assert np.all(f[s >= 1.0] == 1.0)
    assert np.all(np.diff(f) >= -1e-15)
    # germ quotient construction: f(s) + f(1-s) = 1
    g = smooth_step(1.0 - s, 0.5)
    assert np.allclose(f + g, 1.0, atol=1e-15)


def test_bump_plateau_and_support():
    s = np.linspace(-3.0, 3.0, 601)
    b = bump(s, 0.5)
    assert np.all(b[np.abs(s) <= 1.0] == 1.0)
    assert np.all(b[np.abs(s) >= 2.0] == 0.0)
    assert np.all((0.0 <= b) & (b <= 1.0))
    # even symmetry
    assert np.allclose(b, b[::-1], atol=1e-15)


def test_window_plateau():
    t = np.linspace(0.0, 1.0, 501)
    w = window(t, 0.1, 0.9, 0.1, 0.5)
    assert np.all(w[(t >= 0.2) & (t <= 0.8)] == 1.0)
    assert np.all(w[(t <= 0.1) | (t >= 0.9)] == 0.0)
    with pytest.raises(ValueError):
        window(t, 0.1, 0.3, 0.2, 0.5)


def test_measure_bump_fit_quality():
    m = measure_bump(0.5, n_samples=8192)
    assert m.alpha == 0.5
    assert m.r_squared >= 0.9
    assert m.c3_fit > 0.0 and m.c117_fit > 0.0
    assert m.c3_envelope > 0.0
    assert m.sup_d1 > 0.0 and m.sup_d2 > m.sup_d1
    assert m.support_radius == pytest.approx(2.0)


def test_measured_envelope_dominates_fresh_transform():
    # the envelope constant must bound |F|(xi) <= c3_env * exp(-c117 |xi|^alpha)
    # with c117 = 1/(e c3_env)^alpha on an independent FFT
    alpha = 0.5
    m = measure_bump(alpha, n_samples=8192)
    n = 1 << 13
    box = 6.0
    s = np.linspace(-box, box, n, endpoint=False)
    ds = s[1] - s[0]
    f = bump(s, alpha)
    xi = 2.0 * math.pi * np.fft.rfftfreq(n, d=ds)
    mag = np.abs(np.fft.rfft(f)) * ds
    c117 = 1.0 / (math.e * m.c3_envelope) ** alpha
    band = (xi > 0.0) & (xi <= xi[-1] / 4.0)
    envelope = m.c3_envelope * np.exp(-c117 * np.power(xi[band], alpha))
    margin = envelope - mag[band]
    assert float(margin.min()) >= -1e-12 * float(mag.max())


def test_measure_bump_fit_failure_path():
    with pytest.raises(FitFailed):
        # absurd R^2 requirement cannot be met by any real fit
        measure_bump(0.5, n_samples=4096, min_r_squared=1.0)


def test_ball_volume_closed_forms():
    assert ball_volume(2, 1.0) == pytest.approx(math.pi, rel=1e-12)
    assert ball_volume(3, 2.0) == pytest.approx(4.0 / 3.0 * math.pi * 8.0, rel=1e-12)


def test_derivative_envelopes_ordered():
    m = measure_bump(0.5, n_samples=8192)
    # multiplying by |xi| grows the envelope constant
    assert m.c1_gevrey_d1 >= m.c1_gevrey
    assert m.c1_gevrey_d2 >= m.c1_gevrey_d1
