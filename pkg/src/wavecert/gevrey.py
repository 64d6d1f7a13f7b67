"""Compactly supported localizers of Gevrey class 1/alpha.

The cut functions used throughout the toolkit are plateau bumps built from
the germ exp(-s^(-q)) with q = alpha/(1-alpha); that germ is Gevrey of class
1/alpha at s = 0, which is exactly the regularity needed for the
sub-exponential frequency decay exp(-c |xi|^alpha) that the frequency
cascade consumes.  The canonical profile b satisfies

    b(s) = 1   for |s| <= 1,
    b(s) = 0   for |s| >= 2,
    0 <= b <= 1 in between,

so b(2 y / r) is a cut at cylinder half-width r/2 with support radius r.

Constants are measured, not assumed: ``measure_bump`` samples the profile,
takes its FFT, fits the decay |F(xi)| ~ c3 exp(-c117 |xi|^alpha) on the
resolvable band, and also computes the smallest self-consistent envelope
prefactor c3 with c117 = 1/(e c3)^alpha, which is the normalization the
certificate formulas use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitFailed


def gevrey_q(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return alpha / (1.0 - alpha)


def germ(s: np.ndarray, alpha: float) -> np.ndarray:
    """exp(-s^(-q)) for s > 0, zero for s <= 0."""
    s = np.asarray(s, dtype=float)
    q = gevrey_q(alpha)
    out = np.zeros_like(s)
    pos = s > 0.0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-np.power(s[pos], -q))
    return out


def smooth_step(s: np.ndarray, alpha: float) -> np.ndarray:
    """Monotone Gevrey step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    g0 = germ(s, alpha)
    g1 = germ(1.0 - s, alpha)
    out = np.empty_like(s)
    lo = s <= 0.0
    hi = s >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    out[mid] = g0[mid] / (g0[mid] + g1[mid])
    return out


def bump(s: np.ndarray, alpha: float) -> np.ndarray:
    """Canonical plateau profile: 1 on |s|<=1, 0 outside |s|<=2."""
    s = np.abs(np.asarray(s, dtype=float))
    return smooth_step(2.0 - s, alpha)


def window(t: np.ndarray, t_lo: float, t_hi: float, pad: float, alpha: float) -> np.ndarray:
    """Gevrey window equal to 1 on [t_lo+pad, t_hi-pad], 0 outside [t_lo, t_hi]."""
    t = np.asarray(t, dtype=float)
    if pad <= 0.0 or t_hi - t_lo <= 2.0 * pad:
        raise ValueError("window pad must be positive and fit inside the interval")
    rise = smooth_step((t - t_lo) / pad, alpha)
    fall = smooth_step((t_hi - t) / pad, alpha)
    return rise * fall


def ball_volume(dim: int, radius: float) -> float:
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * radius**dim


@dataclass(frozen=True)
class GevreyBump:
    """A measured localizer profile at a fixed Gevrey index ``1/alpha``."""

    alpha: float
    c3_fit: float
    c117_fit: float
    r_squared: float
    c3_envelope: float
    c1_gevrey: float
    c1_gevrey_d1: float
    c1_gevrey_d2: float
    sup_d1: float
    sup_d2: float

    # canonical support: |s| <= 2, plateau |s| <= 1, 1D support length 4
    support_radius: float = 2.0

    # the measured samples (canonical scale): profile values on a uniform
    # s-grid, kept out of equality/repr since they are derived data
    sample_points: np.ndarray | None = field(default=None, compare=False, repr=False)
    sample_values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def profile(self, s: np.ndarray) -> np.ndarray:
        """Profile at the declared support radius: 1 on the inner half,
        0 outside ``support_radius``."""
        return bump(2.0 * np.asarray(s, dtype=float) / self.support_radius, self.alpha)

    def scaled_c1(self, scale: float) -> float:
        """Gevrey constant of s -> profile(s/scale)."""
        return self.c1_gevrey * max(1.0, 1.0 / scale)

    def support_volume_ball(self, dim: int, scale: float) -> float:
        """Volume of supp profile(|y|/scale) in R^dim."""
        return ball_volume(dim, self.support_radius * scale)

    def support_volume_cylinder(self, n_space: int, scale: float) -> float:
        """Volume of the separable time-space support in R^(1+n)."""
        half = self.support_radius * scale
        return 2.0 * half * ball_volume(n_space, half)


def _fourier_magnitude(alpha: float, n_samples: int, box: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sampled profile plus one-sided |F| on the positive frequency axis."""
    s = np.linspace(-box / 2.0, box / 2.0, n_samples, endpoint=False)
    ds = s[1] - s[0]
    f = bump(s, alpha)
    spec = np.fft.rfft(f) * ds
    xi = 2.0 * math.pi * np.fft.rfftfreq(n_samples, d=ds)
    return s, xi, np.abs(spec)


def _envelope_points(xi: np.ndarray, mag: np.ndarray, floor: float) -> np.ndarray:
    """Indices of local maxima of |F| above the noise floor (xi > 0)."""
    keep = (mag > floor) & (xi > 0.0)
    interior = np.zeros_like(keep)
    interior[1:-1] = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:])
    idx = np.nonzero(keep & interior)[0]
    return idx


def _envelope_c3(alpha: float, xi: np.ndarray, mag: np.ndarray) -> float:
    """Smallest c3 with |F(xi)| <= c3 exp(-|xi|^alpha / (e c3)^alpha) on the band."""
    pow_a = np.power(np.abs(xi), alpha)

    def excess(c3: float) -> float:
        c117 = 1.0 / (math.e * c3) ** alpha
        with np.errstate(over="ignore"):
            return float(np.max(mag * np.exp(np.minimum(c117 * pow_a, 700.0)))) - c3

    lo = float(np.max(mag))
    hi = max(2.0 * lo, 1.0)
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise FitFailed("no self-consistent envelope prefactor below 1e12")
    while excess(lo) <= 0.0 and lo > 1e-12:
        lo *= 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def measure_bump(alpha: float, n_samples: int = 1 << 14, box: float = 8.0,
                 min_r_squared: float = 0.9) -> GevreyBump:
    """Sample the canonical profile and fit its frequency decay.

    The two-parameter fit regresses ln|F| against |xi|^alpha on the upper
    envelope of the resolvable band; an R^2 below ``min_r_squared`` raises
    ``FitFailed``.  The envelope constant ties the prefactor and exponent
    together through c117 = 1/(e c3)^alpha so a single number certifies the
    decay of the profile and, rescaled, of every cut built from it.
    """
    s, xi, mag = _fourier_magnitude(alpha, n_samples, box)
    ds = s[1] - s[0]

    floor = max(float(np.max(mag)) * 1e-13, 1e-300)
    # stay well under Nyquist so the discrete transform tracks the continuum
    band = xi <= xi[-1] / 4.0
    idx = _envelope_points(xi, np.where(band, mag, 0.0), floor)
    if idx.size < 8:
        raise FitFailed("too few envelope points in the resolvable band")

    x_fit = np.power(xi[idx], alpha)
    y_fit = np.log(mag[idx])
    coef = np.polyfit(x_fit, y_fit, 1)
    slope, intercept = float(coef[0]), float(coef[1])
    pred = slope * x_fit + intercept
    ss_res = float(np.sum((y_fit - pred) ** 2))
    ss_tot = float(np.sum((y_fit - np.mean(y_fit)) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    if r_squared < min_r_squared:
        raise FitFailed(f"decay fit R^2 = {r_squared:.3f} < {min_r_squared}")
    c117_fit = -slope
    c3_fit = math.exp(intercept)
    if c117_fit <= 0.0:
        raise FitFailed("fitted decay exponent is not positive")

    c3_env = _envelope_c3(alpha, xi[band][1:], mag[band][1:])

    # derivative profiles: transform multiplies by (i xi)^k, so their
    # envelopes come from |xi|^k |F| with no extra differentiation noise
    c3_env_d1 = _envelope_c3(alpha, xi[band][1:], (np.abs(xi) * mag)[band][1:])
    c3_env_d2 = _envelope_c3(alpha, xi[band][1:], (np.abs(xi) ** 2 * mag)[band][1:])

    f = bump(s, alpha)
    d1 = np.gradient(f, ds, edge_order=2)
    d2 = np.gradient(d1, ds, edge_order=2)
    sup_d1 = float(np.max(np.abs(d1)))
    sup_d2 = float(np.max(np.abs(d2)))

    support_len = 4.0  # 1D support of the canonical profile
    return GevreyBump(
        alpha=alpha,
        c3_fit=c3_fit,
        c117_fit=c117_fit,
        r_squared=r_squared,
        c3_envelope=c3_env,
        c1_gevrey=c3_env / support_len,
        c1_gevrey_d1=c3_env_d1 / support_len,
        c1_gevrey_d2=c3_env_d2 / support_len,
        sup_d1=sup_d1,
        sup_d2=sup_d2,
        sample_points=s,
        sample_values=f,
    )
