"""Frequency cascade and the logarithmic stability modulus.

The quantitative unique-continuation estimate trades the small frequency
threshold ``mu`` for an observation bound through a finite geometric
cascade ``mu_1 = mu``, ``mu_j = c156 * mu_{j-1}**alpha``: each covering
step costs one power ``alpha`` and one factor ``c156``.  The cascade
terminates after ``N`` steps (one per covering ball) and the final cut
frequency ``omega = mu_N**alpha / (3 * c131)`` still has to be >= a unit
frequency for the low-frequency projection to carry information, which is
exactly the condition ``mu >= c159``.

The stability modulus itself,

    ``modulus(u, Pu) = c160 * u / ln(1 + u/Pu)**theta``,

is evaluated entirely in log space so that ratios like ``u/Pu = e^100000``
never overflow.  A single smooth formula covers both branches of the
underlying proof: for ``Pu >= e**(-c159) * u`` ("Case A") the estimate is
trivial because the right-hand side already exceeds ``u``; for smaller
``Pu`` ("Case B") the cascade argument applies.  The constant
``c160 = ln(1 + e**c159)**theta + 2**theta * c158`` is the smallest
prefactor making the single formula dominate both branches, and the
evaluator is continuous (to the last ulp of the log) across the split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    AlphaOutOfRange,
    NonPositiveInput,
    Overflow,
    ParameterOrder,
    ZeroSolutionNorm,
)
from .logspace import LogScalar, softplus_ln

__all__ = [
    "CascadeSchedule",
    "StabilityModulus",
    "TimeGap",
    "cascade",
    "cascade_lower_bound",
    "cascade_threshold",
    "modulus",
    "optimal_time_gap",
]


# --------------------------------------------------------------------------
# frequency cascade
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeSchedule:
    """The frequency ladder produced by iterating one covering step.

    Attributes
    ----------
    mu:
        Starting frequency ``mu_1``.
    alpha:
        Gevrey exponent in ``(0, 1)``; each step raises the frequency to
        this power.
    c156:
        Per-step loss factor (the cascade contraction constant).
    n_balls:
        Number of steps ``N`` (one per ball of the covering).
    mu_list:
        The full ladder ``(mu_1, ..., mu_N)``.
    omega:
        Final cut frequency ``mu_N**alpha / (3 * c131)`` of the
        low-frequency projection.
    below_one:
        True when ``mu_N < 1``: the cascade bottomed out and the final
        estimate degenerates (the starting ``mu`` was below ``c159``).
    """

    mu: float
    alpha: float
    c156: float
    n_balls: int
    mu_list: tuple[float, ...]
    omega: float
    below_one: bool

    @property
    def mu_final(self) -> float:
        return self.mu_list[-1]


def cascade(
    mu: float, alpha: float, c156: float, c131: float, n_balls: int
) -> CascadeSchedule:
    """Iterate ``mu_j = c156 * mu_{j-1}**alpha`` for ``n_balls`` steps.

    Parameters are the starting frequency, the Gevrey exponent, the
    per-step loss ``c156 <= 1``, the localization constant ``c131`` fixing
    the final cut frequency, and the number of covering balls.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    if mu <= 0.0:
        raise NonPositiveInput(f"starting frequency must be positive, got {mu}")
    if c156 <= 0.0:
        raise NonPositiveInput(f"cascade factor must be positive, got {c156}")
    if c131 <= 0.0:
        raise NonPositiveInput(f"localization constant must be positive, got {c131}")
    if n_balls < 1:
        raise NonPositiveInput(f"need at least one ball, got {n_balls}")

    ladder = [float(mu)]
    for _ in range(1, n_balls):
        ladder.append(c156 * ladder[-1] ** alpha)
    mu_final = ladder[-1]
    omega = mu_final**alpha / (3.0 * c131)
    return CascadeSchedule(
        mu=float(mu),
        alpha=float(alpha),
        c156=float(c156),
        n_balls=int(n_balls),
        mu_list=tuple(ladder),
        omega=float(omega),
        below_one=bool(mu_final < 1.0),
    )


def cascade_threshold(c156: float, alpha: float, n_balls: int) -> float:
    """Smallest starting frequency with ``mu_N >= 1``:
    ``c159 = c156**(-1 / (alpha**(N-1) (1 - alpha)))``.

    Plain-float evaluation for desk-scale work (reference values like
    ``cascade_threshold(0.5, 0.5, 3) == 256`` come out exact); the
    certificate pipeline uses the log-space variant in the constants
    module for values beyond double range.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < c156 < 1.0:
        raise ParameterOrder(f"cascade factor must lie in (0, 1), got {c156}")
    if n_balls < 1:
        raise NonPositiveInput(f"need at least one ball, got {n_balls}")
    try:
        out = c156 ** (-1.0 / (alpha ** (n_balls - 1) * (1.0 - alpha)))
    except OverflowError:
        out = math.inf
    if not math.isfinite(out):
        ln_c159 = -math.log(c156) / (alpha ** (n_balls - 1) * (1.0 - alpha))
        raise Overflow(
            "cascade threshold exceeds double range "
            f"(ln value ~ {ln_c159:.4g}); use the log-space constants pipeline"
        )
    return out


def cascade_lower_bound(mu: float, alpha: float, c156: float, j: int) -> float:
    """Closed-form floor ``c156**(1/(1-alpha)) * mu**(alpha**(j-1))``.

    Every ladder value satisfies ``mu_j >= cascade_lower_bound(...)`` when
    ``c156 <= 1``; the bound is what makes the threshold ``c159`` (the
    smallest ``mu`` with ``mu_N >= 1``) computable in closed form.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    if j < 1:
        raise NonPositiveInput(f"step index must be >= 1, got {j}")
    # Evaluate in log space: at certificate scale c156 is ~1e-55 and the
    # exponent 1/(1-alpha) can be large.
    ln_bound = math.log(c156) / (1.0 - alpha) + alpha ** (j - 1) * math.log(mu)
    return math.exp(ln_bound)


# --------------------------------------------------------------------------
# stability modulus
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityModulus:
    """Bundle of constants defining one logarithmic stability estimate.

    ``c160`` is the prefactor (``c161`` or ``c163`` for the variant
    estimates — the formula is the same), ``theta`` the log exponent,
    ``c159`` the Case A/B threshold exponent, and ``m`` in ``(0, 1]``
    selects the weaker-norm variant: the bound for the ``H^(1-m)`` norm
    uses ``c160**m`` and exponent ``m * theta``.  ``m = 1`` is the plain
    ``L^2`` estimate.
    """

    c160: LogScalar
    theta: float
    c159: LogScalar
    m: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 1.0:
            raise AlphaOutOfRange(f"theta must lie in (0, 1], got {self.theta}")
        if not 0.0 < self.m <= 1.0:
            raise AlphaOutOfRange(f"m must lie in (0, 1], got {self.m}")
        if not isinstance(self.c160, LogScalar):
            object.__setattr__(self, "c160", LogScalar.of(self.c160))
        if not isinstance(self.c159, LogScalar):
            object.__setattr__(self, "c159", LogScalar.of(self.c159))

    def case_of(self, u_h1: float, pu_l2: float) -> str:
        """Classify which branch of the proof applies: ``"A"`` when
        ``pu_l2 >= e**(-c159) * u_h1`` (trivial branch), else ``"B"``."""
        if u_h1 <= 0.0:
            raise ZeroSolutionNorm(
                "cannot classify a vanishing solution norm; the estimate is vacuous"
            )
        if pu_l2 <= 0.0:
            return "B"
        ln_ratio = math.log(u_h1) - math.log(pu_l2)
        return "A" if ln_ratio <= self.c159.to_float() else "B"


def modulus(u_h1: float, pu_l2: float, c: StabilityModulus) -> float:
    """Evaluate ``c160**m * u_h1 / ln(1 + u_h1/pu_l2)**(m*theta)``.

    All ratio arithmetic happens in log space: ``ln(1 + e**x)`` is
    evaluated with the stable softplus branch so ``pu_l2`` down to the
    smallest subnormal (and beyond, via exact zero) is handled without
    overflow.  ``pu_l2 = 0`` returns ``0.0`` — the ``ln`` diverges and the
    estimate collapses to exact unique continuation.
    """
    if u_h1 < 0.0 or pu_l2 < 0.0:
        raise NonPositiveInput(
            f"norms must be nonnegative, got u_h1={u_h1}, pu_l2={pu_l2}"
        )
    if u_h1 == 0.0:
        if pu_l2 > 0.0:
            raise ZeroSolutionNorm(
                "u_h1 = 0 with pu_l2 > 0 is vacuous: the bound is trivially 0 "
                "but the hypothesis u != 0 of the estimate fails"
            )
        return 0.0
    if pu_l2 == 0.0:
        return 0.0

    ln_ratio = math.log(u_h1) - math.log(pu_l2)
    # ln(ln(1 + ratio)), with softplus_ln giving ln(1+e^x) stably for any x.
    ln_log_term = math.log(softplus_ln(ln_ratio))
    ln_bound = c.m * c.c160.ln + math.log(u_h1) - c.m * c.theta * ln_log_term
    return LogScalar(ln_bound).to_float()


# --------------------------------------------------------------------------
# observation-time optimization
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeGap:
    """Result of the observation-time optimization.

    ``t_opt = T - ell`` is the infimal time for which the estimate holds
    on the full slab, and ``certified_time = T - ell + gamma`` is the
    time actually certified once the positive margin ``gamma`` needed by
    the level-set geometry is added back.
    """

    t_opt: float
    certified_time: float


def optimal_time_gap(T: float, ell: float, gamma: float) -> TimeGap:
    """Sharp time threshold for the stability region.

    For observation time ``T`` and core radius ``ell``, the influence
    domain at margin ``gamma`` is contained in the certified slab of
    half-length ``T - ell + gamma``, and no shorter slab works uniformly
    in ``gamma``.  Requires ``0 < gamma < T - ell``.
    """
    if ell <= 0.0 or T <= 0.0:
        raise NonPositiveInput(f"T and ell must be positive, got T={T}, ell={ell}")
    if not 0.0 < gamma < T - ell:
        raise ParameterOrder(
            f"need 0 < gamma < T - ell, got gamma={gamma}, T - ell={T - ell}"
        )
    return TimeGap(t_opt=T - ell, certified_time=T - ell + gamma)
