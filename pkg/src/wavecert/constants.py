"""Explicit constants pipeline for the logarithmic stability certificate.

Evaluates, in dependency order, every constant the certificate needs:

* :func:`pseudoconvexity_constants` -- conormal pseudoconvexity bounds (C3..R1),
* :func:`radii_constants`           -- certified radii and perturbation scales (c100..r),
* :func:`carleman_constants`        -- Carleman-inequality norms (c1T, c133, c2T),
* :func:`gevrey_filter_constants`   -- frequency-filter decay pairs (c3, c117, c106, c107),
* :func:`cascade_constants`         -- frequency-cascade contraction family (beta..c159),
* :func:`aggregate_modulus_constants` -- final modulus constants (c158, c160).

Each named constant is set exactly to its defining formula, which is the
boundary of its allowed direction, so the emitted table can be re-checked by
re-evaluating the formulas.  The ball-count-dependent aggregates are iterated
in log space (:class:`~wavecert.logspace.LogScalar`) because they overflow
IEEE doubles by design, not by accident.

Five constants of the local theory (c101, c102, c112, c118 and the Gevrey
scale c1x) are imported numbers, not derivable from the toolkit inputs; they
enter through :class:`CompanionInputs` and any certificate evaluated with
their defaults is flagged as conditional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .errors import (
    AlphaOutOfRange,
    BetaTooSmall,
    DivergentConstant,
    GeometryViolated,
    NonPositiveInput,
    Overflow,
    ParameterOrder,
)
from .logspace import LogScalar, log_max, log_min, softplus_of_large

Value = Union[float, LogScalar]

# Recurring geometric factor of the radius chain.
_G16 = 16.0 + 1.0 / 16.0

# Natural logs above this raise Overflow instead of silently degrading.
_LN_CAP = 1e300


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in R^dim."""
    return math.pi ** (dim / 2.0) / math.exp(float(gammaln(dim / 2.0 + 1.0)))


def _ln_gamma(x: float) -> float:
    return float(gammaln(x))


def _ls(x: Value) -> LogScalar:
    return LogScalar.of(x)


# ---------------------------------------------------------------------------
# input bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiData:
    """Sup/inf data of the weight function over the working region.

    ``psi_d3`` feeds the C^3 variant selected by ``rho == 1``;
    ``psi_d2_hoelder`` feeds the Hoelder variant used when ``rho < 1``.
    """

    n: int
    psi_d1: float  # sup |psi'|
    psi_d2: float  # sup |psi''|
    cl: float  # min |psi'|
    p1: float  # min of the principal symbol evaluated on psi'
    psi_min: float
    psi_max: float
    dist: float  # separation of the observation region from the working boundary
    vol: float  # volume of the working region
    psi_d3: float = 0.0
    psi_d2_hoelder: float = 0.0
    rho: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GeometryViolated("spatial dimension must be >= 1")
        for name in ("psi_d1", "cl", "p1", "dist", "vol"):
            if getattr(self, name) <= 0.0:
                raise NonPositiveInput(f"{name} must be > 0")
        for name in ("psi_d2", "psi_d3", "psi_d2_hoelder"):
            if getattr(self, name) < 0.0:
                raise NonPositiveInput(f"{name} must be >= 0")
        if not self.psi_min < self.psi_max:
            raise ParameterOrder("psi_min must be < psi_max")
        if not 0.0 < self.rho <= 1.0:
            raise GeometryViolated("rho must lie in (0, 1]")


@dataclass(frozen=True)
class OperatorBounds:
    """Coefficient bounds of the wave operator over the working region.

    ``g_c1`` is the full C^1 norm (sup of the entries plus sup of their first
    derivatives), so ``g_c1 >= g_c0`` always.
    """

    n: int
    a1: float  # lower eigenvalue bound of the dual metric
    b1: float  # upper eigenvalue bound of the dual metric
    g_c0: float  # sup |g^{jk}|
    g_c1: float  # C^1 norm of g^{jk}
    h_c0: float = 0.0
    q_c0: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GeometryViolated("spatial dimension must be >= 1")
        for name in ("a1", "b1", "g_c0", "g_c1"):
            if getattr(self, name) <= 0.0:
                raise NonPositiveInput(f"{name} must be > 0")
        for name in ("h_c0", "q_c0"):
            if getattr(self, name) < 0.0:
                raise NonPositiveInput(f"{name} must be >= 0")
        if self.b1 < self.a1:
            raise ParameterOrder("b1 must be >= a1")
        if self.g_c1 < self.g_c0:
            raise ParameterOrder("g_c1 is a C^1 norm and must be >= g_c0")


def operator_bounds_from_field(field) -> OperatorBounds:
    """Measure :class:`OperatorBounds` from a metric field on a grid."""
    g = np.asarray(field.g_inv, dtype=float)
    n = g.shape[-1]
    g_c0 = float(np.max(np.abs(g)))
    spacings = [float(ax[1] - ax[0]) for ax in field.axes]
    sup_grad = 0.0
    for j in range(n):
        for k in range(n):
            grads = np.gradient(g[..., j, k], *spacings, edge_order=2)
            if n == 1:
                grads = [grads]
            for comp in grads:
                sup_grad = max(sup_grad, float(np.max(np.abs(comp))))
    h_c0 = 0.0
    if field.h_coeff is not None:
        h = np.abs(np.asarray(field.h_coeff))
        h_c0 = float(np.max(np.sqrt(np.sum(h * h, axis=-1))))
    q_c0 = 0.0
    if field.q_coeff is not None:
        q_c0 = float(np.max(np.abs(np.asarray(field.q_coeff))))
    return OperatorBounds(
        n=n,
        a1=field.a1,
        b1=field.b1,
        g_c0=g_c0,
        g_c1=g_c0 + sup_grad,
        h_c0=h_c0,
        q_c0=q_c0,
    )


@dataclass(frozen=True)
class LocalizerProfile:
    """Gevrey and C^k data of the localizer profiles.

    ``c1_b``/``c1_bp``/``c1_bpp`` are the (unscaled) Gevrey prefactors of the
    canonical bump profile and its first two derivatives; ``b_d1``/``b_d2``
    its derivative sups; ``chi1_d1``/``chi1_d2`` the derivative sups of the
    unit-scale collar cut (its scale enters the formulas explicitly).  The
    frequency symbol is supported in ``|xi0| <= 2`` and equals one on
    ``|xi0| <= 1``; ``a_sup`` is its sup norm.
    """

    alpha: float
    c1_b: float
    c1_bp: float
    c1_bpp: float
    b_d1: float
    b_d2: float
    chi1_d1: float
    chi1_d2: float
    a_sup: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise AlphaOutOfRange("alpha must lie strictly between 0 and 1")
        for name in ("c1_b", "c1_bp", "c1_bpp", "b_d1", "b_d2", "chi1_d1", "chi1_d2", "a_sup"):
            if getattr(self, name) <= 0.0:
                raise NonPositiveInput(f"{name} must be > 0")

    def chi1_c2(self) -> float:
        """C^2 norm of the collar cut (sup norm 1 plus derivative sups)."""
        return 1.0 + self.chi1_d1 + self.chi1_d2


def localizer_profile_from_bump(bump, chi1_d1: float | None = None, chi1_d2: float | None = None) -> LocalizerProfile:
    """Build a :class:`LocalizerProfile` from a measured ``GevreyBump``.

    The collar cut is one half of the same plateau profile, so its derivative
    sups default to the bump's.
    """
    return LocalizerProfile(
        alpha=bump.alpha,
        c1_b=bump.c1_gevrey,
        c1_bp=bump.c1_gevrey_d1,
        c1_bpp=bump.c1_gevrey_d2,
        b_d1=bump.sup_d1,
        b_d2=bump.sup_d2,
        chi1_d1=bump.sup_d1 if chi1_d1 is None else chi1_d1,
        chi1_d2=bump.sup_d2 if chi1_d2 is None else chi1_d2,
    )


@dataclass(frozen=True)
class CompanionInputs:
    """Imported constants of the local stability theory.

    None of these five numbers is derivable from the toolkit inputs.  They
    default to 1.0; a certificate evaluated with any default in place is
    conditional on these values and reports say so.
    """

    c101: float = 1.0
    c102: float = 1.0
    c112: float = 1.0
    c118: float = 1.0
    c1x: float = 1.0

    def __post_init__(self) -> None:
        for name in ("c101", "c102", "c112", "c118", "c1x"):
            if getattr(self, name) <= 0.0:
                raise NonPositiveInput(f"{name} must be > 0")
        if self.c118 < 1.0:
            raise ParameterOrder("c118 bounds a quantity that is at least 1")

    def defaults_in_use(self) -> tuple[str, ...]:
        return tuple(
            name
            for name in ("c101", "c102", "c112", "c118", "c1x")
            if getattr(self, name) == 1.0
        )


def gevrey_rescaled(c1: float, scale: float) -> float:
    """Gevrey prefactor of ``s -> f(s / scale)`` given the prefactor of f.

    Each derivative of the rescaled function gains a factor 1/scale, absorbed
    into the single-parameter Gevrey form through max(1, 1/scale).
    """
    if scale <= 0.0:
        raise NonPositiveInput("scale must be > 0")
    return c1 * max(1.0, 1.0 / scale)


# ---------------------------------------------------------------------------
# stage 1: pseudoconvexity rows
# ---------------------------------------------------------------------------


def pseudoconvexity_constants(op: OperatorBounds, psi: PsiData) -> dict[str, float]:
    """Rows C3 .. R1 of the constants table."""
    if op.n != psi.n:
        raise GeometryViolated("operator and weight data disagree on the dimension")
    n = psi.n
    psi1 = psi.psi_d1
    psi2 = psi.psi_d2
    psi1_c1 = psi1 + psi2  # C^1 norm of psi'

    out: dict[str, float] = {}
    out["C3"] = 20.0 * (1.0 + n**2 * op.g_c1**2) * psi1_c1 * (1.0 + psi1**2)
    out["MP"] = 1.0
    out["M1"] = (out["MP"] + out["C3"]) * max(2.0 / op.a1**2, 1.0 / (2.0 * psi.p1**2))
    out["M2"] = (2.0 / min(1.0, op.a1)) * (out["MP"] + out["C3"]) + ((op.b1 + op.a1) / 2.0) * out["M1"]
    out["lam"] = max(out["M1"], math.e, 2.0 * psi2 / psi.cl**2)
    out["phi0"] = math.exp(-1.0)
    out["phiM"] = math.e
    out["R1"] = min(1.0, psi.dist, 1.0 / (out["lam"] * psi1))
    return out


# ---------------------------------------------------------------------------
# stage 2: radii rows
# ---------------------------------------------------------------------------


def radii_constants(prev: Mapping[str, float], op: OperatorBounds, psi: PsiData) -> dict[str, float]:
    """Rows c100 .. r, plus the curvature scale and weight-derivative bounds.

    Besides the table rows the result carries ``L_max`` (the exponential-weight
    curvature scale), ``cT`` (= n * L_max, or its C^3 replacement), and the
    quadratic-weight derivative bounds ``f_d1_bound``/``f_d2_bound``, all of
    which downstream stages reuse.
    """
    n = psi.n
    rho = psi.rho
    psi1, psi2, psi3 = psi.psi_d1, psi.psi_d2, psi.psi_d3
    lam, phi0, phi_m = prev["lam"], prev["phi0"], prev["phiM"]
    m1, m2 = prev["M1"], prev["M2"]

    if rho == 1.0:
        # C^3 variant: the curvature scale is the sum of the second- and
        # third-derivative bounds of the exponential weight.
        ct1 = lam * phi_m * (psi2 + lam * psi1**2)
        ct2 = lam * phi_m * (3.0 * lam * psi1 * psi2 + lam**2 * psi1**3 + psi3)
        ct = ct1 + ct2
        big_l = ct / n
        hoelder_d2 = ct
    else:
        psi_lip = psi1
        big_l = phi_m * max(
            lam * psi.psi_d2_hoelder,
            lam**2 * psi_lip * psi2,
            lam**3 * psi_lip * psi1**2,
        )
        ct = n * big_l
        hoelder_d2 = 3.0 * big_l

    out: dict[str, float] = {}
    out["c100"] = 10.0 * (1.0 + n**4 * op.g_c1**2)
    out["eps0"] = 1.0 / (2.0 * n * (lam * phi_m * (psi2 + lam * psi1**2) + 4.0 * n * big_l))

    candidates = [
        prev["R1"],
        psi.cl / (2.0 * phi_m * (psi2 + lam * psi1**2 + 4.0 * n * big_l / lam)),
        (lam**2 * phi_m * psi.cl**2 / (4.0 * n * big_l)) ** (1.0 / rho),
        (
            1.0
            / (4.0 * out["c100"] * (n * big_l) ** 2 * m1 * (1.0 + lam**2 * phi_m**2 * psi1**2))
        )
        ** (1.0 / (2.0 + 2.0 * rho)),
        (1.0 / 8.0) * (out["eps0"] / math.sqrt(2.0 * m2)) * math.sqrt(_G16),
        (
            lam
            * phi0
            / (
                4.0
                * out["c100"]
                * n
                * big_l
                * (
                    1.0
                    + lam**2 * phi_m**2 * psi1**2
                    + lam**2 * phi_m**2 * (psi1 * psi2 + lam * psi1**3)
                )
            )
        )
        ** (1.0 / rho),
    ]
    out["R2"] = min(candidates)
    r2 = out["R2"]
    if r2 <= 1e3 * np.finfo(float).tiny:
        raise _degenerate("R2", candidates)

    out["sigma"] = 2.0 * n * big_l * r2**rho

    f_d2_bound = lam * phi_m * (psi2 + lam * psi1**2) + 4.0 * n * big_l * r2**rho
    f_d1_bound = lam * phi_m * psi1 + 5.0 * n * big_l * r2 ** (1.0 + rho)
    out["tau0"] = max(
        1.0,
        64.0
        * (4.0 * m1 + 1.0 / (4.0 * lam * phi0))
        * (
            f_d2_bound**2 * (1.0 + n**2 * op.g_c0) ** 2
            + n * op.h_c0**2 * (2.0 + 2.0 * f_d1_bound**2)
            + 2.0 * op.q_c0**2
        ),
    )

    out["R"] = (1.0 / 4.0) * _G16 ** (-0.5) * r2

    if rho == 1.0:
        q_geom = (1.0 / 4.0) * _G16 ** (-0.5)
        out["delta"] = ct * q_geom**2 * r2**3 / 8.0
    else:
        out["delta"] = n * (1.0 / 32.0) * (1.0 / _G16) * big_l * r2 ** (2.0 + rho)

    out["r"] = (
        n
        * lam**2
        * psi.cl**2
        * (1.0 / 4.0)
        * (1.0 / _G16)
        * r2 ** (2.0 + rho)
        / (2.0 * math.e * (lam * phi_m * psi1 + 5.0 * n * hoelder_d2))
    )

    for name in ("R", "delta", "r"):
        if out[name] <= 1e3 * np.finfo(float).tiny:
            raise _degenerate(name, [out[name]])

    out["L_max"] = big_l
    out["cT"] = ct
    out["f_d1_bound"] = f_d1_bound
    out["f_d2_bound"] = f_d2_bound
    return out


def _degenerate(row: str, candidates) -> Exception:
    from .errors import DegenerateRadius

    vals = ", ".join(f"{c:.3e}" for c in candidates)
    return DegenerateRadius(f"row {row} collapsed to machine precision (candidates: {vals})")


# ---------------------------------------------------------------------------
# stage 3: Carleman rows
# ---------------------------------------------------------------------------


def carleman_constants(
    prev: Mapping[str, float], op: OperatorBounds, loc: LocalizerProfile, psi: PsiData
) -> dict[str, float]:
    """Rows c1T, c133, c2T of the constants table."""
    n = psi.n
    tau0 = prev["tau0"]
    lam, phi0 = prev["lam"], prev["phi0"]
    big_r = prev["R"]
    r2, rho = prev["R2"], psi.rho
    big_l = prev["L_max"]

    out: dict[str, float] = {}
    out["c1T"] = math.sqrt(4.0 * (4.0 * prev["M1"] / tau0 + 1.0 / (4.0 * lam * phi0)))
    out["c133"] = (
        2.0
        * (1.0 + n**2 * op.g_c0)
        * (
            loc.chi1_d2 / (tau0 * (4.0 * big_r) ** 2)
            + (loc.chi1_d1 / (4.0 * big_r))
            * (
                1.0
                + lam * prev["phiM"] * psi.psi_d1
                + 5.0 * n * big_l * r2 ** (1.0 + rho)
                + op.h_c0 / tau0
            )
        )
    )
    out["c2T"] = (0.5 + math.sqrt(2.0 * prev["M2"])) * (
        1.0 + 2.0 * loc.chi1_d1 / (tau0 * 4.0 * big_r)
    ) + (out["c1T"] / math.sqrt(tau0)) * out["c133"]
    return out


# ---------------------------------------------------------------------------
# stage 4: frequency-filter constants
# ---------------------------------------------------------------------------


def gevrey_filter_constants(
    loc: LocalizerProfile,
    beta1: float,
    support_vol: float,
    c1f: float | None = None,
) -> dict[str, Value]:
    """Decay pair of the frequency filter for one localizer.

    ``c3 = c1f * support_vol`` is the Fourier prefactor, ``c117`` the decay
    rate of the localizer transform, ``c106``/``c107`` the rate and prefactor
    of the filtered-commutator bound at splitting ratio ``beta1``.
    """
    alpha = loc.alpha
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange("alpha must lie strictly between 0 and 1")
    if beta1 <= 2.0:
        raise BetaTooSmall(f"splitting ratio beta1 = {beta1} must exceed 2")
    if support_vol <= 0.0:
        raise NonPositiveInput("support_vol must be > 0")
    c1f = loc.c1_b if c1f is None else c1f

    out: dict[str, Value] = {}
    out["c3"] = c1f * support_vol
    out["c117"] = 1.0 / (math.e * out["c3"]) ** alpha
    out["c106"] = out["c117"] * (1.0 - 2.0 / beta1) ** alpha / 4.0
    out["c107"] = _filter_prefactor(alpha, out["c3"], beta1, out["c117"], out["c106"])
    return out


def _filter_prefactor(alpha: float, c3: Value, beta1: float, c117: Value, c106: Value) -> LogScalar:
    """(c3 (8/beta1) Gamma(1/alpha) / [alpha c117^{1/alpha} (alpha c106)^{1/(alpha-1)}])^{1/2}."""
    ln = 0.5 * (
        _ls(c3).ln
        + math.log(8.0 / beta1)
        + _ln_gamma(1.0 / alpha)
        - math.log(alpha)
        - (1.0 / alpha) * _ls(c117).ln
        - (1.0 / (alpha - 1.0)) * (math.log(alpha) + _ls(c106).ln)
    )
    return LogScalar(ln)


def commutator_filter_constants(loc: LocalizerProfile, r: float, n: int) -> dict[str, Value]:
    """Filter constants of the commutator localizer family at ball scale r.

    The functions inside the commutators are derivative combinations of the
    cut at half-width r/2, so the Gevrey prefactors are rescaled by 2/r and
    the support volume is that of a radius-r ball in R^(n+1).
    """
    alpha = loc.alpha
    scale = r / 2.0
    c1b = gevrey_rescaled(loc.c1_b, scale)
    c1bp = gevrey_rescaled(loc.c1_bp, scale)
    c1bpp = gevrey_rescaled(loc.c1_bpp, scale)

    out: dict[str, Value] = {}
    out["c_f1"] = 2.0 ** (2.0 / alpha) * math.e ** (2.0 / alpha) * c1b**2 + c1bpp + c1bp
    out["c_f2"] = (
        2.0 ** (1.0 / alpha + 1.0) * math.e ** (1.0 / alpha) * c1b
        + 2.0 ** (2.0 / alpha + 1.0) * math.e ** (2.0 / alpha) * c1b**2
    )
    out["c_f3"] = 4.0 * c1bp + 2.0 * c1bpp
    out["c_Df2"] = (
        2.0 ** (2.0 / alpha + 1.0) * math.e ** (2.0 / alpha) * c1b**2
        + 2.0 ** (1.0 / alpha + 1.0) * math.e ** (1.0 / alpha) * c1b * c1bp
    )
    out["c_Df3"] = 2.0 ** (1.0 / alpha + 1.0) * math.e ** (1.0 / alpha) * c1b * c1bp + 2.0 * c1bpp
    out["c_comm"] = out["c_f1"] + out["c_f2"] + out["c_f3"] + out["c_Df2"] + out["c_Df3"]
    if not math.isfinite(out["c_comm"]):
        raise Overflow("commutator Gevrey prefactors left float range at this ball scale")

    # the support volume r^(n+1) underflows doubles long before the derived
    # filter constants leave log-space range, so the family lives there
    ln_vol = math.log(unit_ball_volume(n + 1)) + (n + 1) * math.log(r)
    c3 = LogScalar(math.log(out["c_comm"]) + ln_vol)
    out["c3"] = c3
    out["c117"] = LogScalar(-alpha * (1.0 + c3.ln))
    # commutator variant: splitting ratio 3 folded into the rate
    out["c106"] = LogScalar(-(alpha * math.log(3.0) + math.log(4.0)) - alpha * (1.0 + c3.ln))
    out["c107"] = _filter_prefactor(alpha, c3, 3.0, out["c117"], out["c106"])
    out["c108"] = out["c107"]
    return out


def wide_filter_constants(loc: LocalizerProfile, big_r: float, n: int) -> dict[str, Value]:
    """Filter constants of the wide localizer family at ball scale R.

    This family fixes the frequency-splitting ratio ``beta`` so that its decay
    rate times beta^alpha equals one, which is what makes the cascade step
    contraction factor explicit.
    """
    alpha = loc.alpha
    c1b_r = gevrey_rescaled(loc.c1_b, big_r)
    if not math.isfinite(c1b_r):
        raise Overflow("wide Gevrey prefactor left float range at this ball scale")
    ln_vol = math.log(unit_ball_volume(n + 1)) + (n + 1) * math.log(2.0 * big_r)

    out: dict[str, Value] = {}
    c3t = LogScalar(math.log(c1b_r) + ln_vol)
    out["c3t"] = c3t
    c117t = LogScalar(-alpha * (math.log(2.0) + c3t.ln))
    out["c117t"] = c117t
    # beta - 2 computed from its defining power, so (1 - 2/beta)^alpha below
    # does not cancel when beta is barely above 2; the excess may underflow
    # to zero while the product (c117t/4)(excess/beta)^alpha stays exactly
    # beta^{-alpha}, so that product is assembled in log space
    ln_excess = (math.log(4.0) - c117t.ln) / alpha
    beta = 2.0 + math.exp(ln_excess) if ln_excess < 700.0 else math.inf
    if not math.isfinite(beta):
        raise DivergentConstant("wide-filter splitting ratio diverged; decay rate below float range")
    out["beta"] = beta
    out["c106t"] = LogScalar(c117t.ln - math.log(4.0) + alpha * (ln_excess - math.log(beta)))
    out["c107t"] = _filter_prefactor(alpha, c3t, beta, c117t, out["c106t"])
    return out


# ---------------------------------------------------------------------------
# stage 5: cascade constants
# ---------------------------------------------------------------------------


def c120_unified(big_b: float, alpha: float) -> float:
    """Envelope constant (q/|ln B|)^q e^{-q} B with q = (1-alpha)/alpha.

    For B > 1 this is the literal product form; for B < 1 it is the same
    supremum evaluated on the other branch, which keeps the value finite.
    B = 1 makes the supremum diverge.
    """
    if big_b <= 0.0:
        raise NonPositiveInput("B must be > 0")
    if big_b == 1.0:
        raise DivergentConstant("envelope constant c120 diverges at B = 1")
    q = (1.0 - alpha) / alpha
    if q == 0.0:
        return big_b
    return (q / abs(math.log(big_b))) ** q * math.exp(-q) * big_b


def cascade_constants(
    table: Mapping[str, float],
    op: OperatorBounds,
    loc: LocalizerProfile,
    companion: CompanionInputs,
    n_balls: int,
) -> dict[str, Value]:
    """Contraction family of the frequency cascade.

    ``n_balls`` is the number of covering balls the cascade iterates over.
    The result contains the full dependency chain (c2x .. c137) plus the
    headline constants beta, c131, c132, c135, c137, c152, c153, c156, c159,
    the step constants c164/c165, and the Carleman-side envelopes c114/c115.
    """
    if n_balls < 1:
        raise ParameterOrder("the covering must contain at least one ball")
    alpha = loc.alpha
    n = op.n
    r, big_r = table["r"], table["R"]
    delta, eps0, tau0 = table["delta"], table["eps0"], table["tau0"]

    comm = commutator_filter_constants(loc, r, n)
    wide = wide_filter_constants(loc, big_r, n)
    beta = float(wide["beta"])

    out: dict[str, Value] = {}
    out.update({f"comm_{k}": v for k, v in comm.items()})
    out.update({f"wide_{k}": v for k, v in wide.items()})
    out["beta"] = beta

    c1x = companion.c1x
    out["c2x"] = 1.0 / (math.e * n_balls * c1x) ** alpha
    out["c119"] = delta * c1x
    out["B"] = delta**alpha * c1x
    out["c120"] = c120_unified(out["B"], alpha)
    out["c121"] = (2.0 * math.pi * out["c119"] / alpha) * math.gamma(2.0) * (2.0 / alpha) ** alpha * out["c120"]
    out["c122"] = max(1.0, 4.0 * companion.c118 * out["c121"], c1x / big_r)
    out["c123"] = 1.0 / (math.e * out["c122"]) ** alpha
    out["c128"] = out["c123"] / (3.0**alpha * 2.0)
    out["c110"] = _filter_prefactor(alpha, out["c122"], 3.0, out["c123"], out["c128"])
    out["c109"] = min(math.sqrt(eps0 * delta / 36.0), out["c128"] / 2.0, 1.0)
    out["c130"] = (3.0 * out["c109"] / (4.0 * delta)) * (1.0 / 16.0) ** 5
    out["c131"] = max(
        math.sqrt(2.0) * 16.0**6,
        math.sqrt(2.0) * 16.0**6 * 3.0 ** (alpha - 1.0) * math.sqrt(eps0 * delta) / out["c123"],
        16.0**6 * math.sqrt(eps0 * delta) / (3.0 * math.sqrt(2.0)),
    )
    out["c135"] = r**alpha * out["c2x"] / (2.0 * 3.0**alpha)
    c102 = companion.c102
    out["c137"] = min(
        0.5 * c102 * delta**alpha * (out["c130"] / math.sqrt(2.0)) ** alpha,
        0.5 * delta * out["c130"] / (2.0 * math.sqrt(2.0)),
        0.5 * c102 * delta**alpha * (out["c130"] / (2.0 * math.sqrt(2.0))) ** alpha,
    )
    out["c132"] = min(out["c135"], out["c137"])

    out["c164"] = comm["c107"]
    out["c165"] = _ls(comm["c117"]) * (beta**alpha / (3.0**alpha * 4.0))

    out["c152"] = 2.0 * (1.0 + n_balls * loc.b_d1 / r)
    out["c153"] = 1.0 + 2.0 * n_balls * (1.0 + n**2 * op.g_c0 + op.h_c0) * (
        loc.b_d1 / r + loc.b_d2 / r**2 + (n_balls - 1) * loc.b_d1**2 / r**2
    )

    # the four candidates span hundreds of orders of magnitude, so the min
    # is taken on log values and the result stays a log scalar
    c156_ls = min(
        (
            _ls(1.0 / (18.0 * beta * out["c131"])),
            _ls(out["c132"]) ** (1.0 / alpha),
            _ls(out["c165"]) ** (1.0 / alpha),
            _ls(comm["c106"]) ** (1.0 / alpha) / (3.0 * out["c131"]),
        ),
        key=lambda v: v.ln,
    )
    out["c156"] = c156_ls
    out["c159"] = c159_log(c156_ls, alpha, n_balls)

    # Carleman-side envelopes of the local estimate (log space: the delta
    # powers in the denominators overflow doubles for small radii).
    chi1_c2 = loc.chi1_c2()
    f1, f2 = table["f_d1_bound"], table["f_d2_bound"]
    c1t = table["c1T"]
    out["c114"] = (
        _ls(c1t) ** 2
        * _ls(op.g_c1) ** 2
        * _ls(chi1_c2) ** 2
        * (1.0 + _ls(f1) ** 4 / _ls(delta) ** 4 + _ls(f2) ** 2 / _ls(delta) ** 2)
    )
    out["c115"] = (
        _ls(table["c2T"]) ** 2
        * (_ls(f1) ** 2 + 1.0)
        * (_ls(27.0 * math.exp(-3.0)) / _ls(delta) ** 3)
        * (1.0 + _ls(loc.chi1_d1) ** 2 / _ls(delta) ** 2)
    )
    return out


def c159_log(c156: Value, alpha: float, n_balls: int) -> LogScalar:
    """Smallness threshold c156^(-1 / (alpha^(N-1) (1-alpha))) in log space.

    Raises :class:`Overflow` with the decimal exponent when even the log
    overflows, which is the expected outcome for large N at small alpha.
    """
    ln_c156 = _ls(c156).ln
    if not ln_c156 < 0.0:
        raise ParameterOrder("c156 must lie in (0, 1)")
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange("alpha must lie strictly between 0 and 1")
    denom = alpha ** (n_balls - 1) * (1.0 - alpha)
    if denom > 0.0:
        ln_c159 = -ln_c156 / denom
        if math.isfinite(ln_c159) and ln_c159 <= _LN_CAP:
            return LogScalar(ln_c159)
    # ln c159 itself left float range; report its decimal exponent
    ln_ln = (
        math.log(-ln_c156)
        - (n_balls - 1) * math.log(alpha)
        - math.log(1.0 - alpha)
    )
    raise Overflow(
        "threshold constant c159 has ln(value) ~ 10^"
        f"{ln_ln / math.log(10.0):.1f}; beyond log-space range"
    )


# ---------------------------------------------------------------------------
# stage 6: cascade aggregation
# ---------------------------------------------------------------------------


def _decay_integrals(alpha: float, delta: float, c102: float) -> tuple[float, float]:
    """The two absolute integrals of the local estimate, by adaptive quadrature.

    I1 = int_R sqrt((s/delta)^2 + 1) exp(-c102 s^alpha / 2) ds
    I2 = int_R exp(-c102 |x|^alpha) dx  (= (2/alpha) Gamma(1/alpha) c102^(-1/alpha))
    """

    def f1(s: float) -> float:
        return math.sqrt((s / delta) ** 2 + 1.0) * math.exp(-c102 * s**alpha / 2.0)

    i1, _ = quad(f1, 0.0, np.inf, epsabs=0.0, epsrel=1e-10, limit=400)
    i2 = (2.0 / alpha) * math.exp(_ln_gamma(1.0 / alpha)) * c102 ** (-1.0 / alpha)
    return 2.0 * i1, i2


def local_prefactor(
    c_u: Value,
    c_p: Value,
    c_a: Value,
    table: Mapping[str, float],
    casc: Mapping[str, Value],
    loc: LocalizerProfile,
    companion: CompanionInputs,
    integrals: tuple[float, float] | None = None,
) -> LogScalar:
    """Prefactor of the local low-frequency estimate for given norm bounds.

    ``c_u``/``c_p``/``c_a`` bound the solution, its source, and the filtered
    source; the result is the max of the interior (c134) and boundary-layer
    (c136) contributions, in log space.
    """
    alpha = loc.alpha
    r, delta, tau0 = table["r"], table["delta"], table["tau0"]
    if integrals is None:
        integrals = _decay_integrals(alpha, delta, companion.c102)
    i1, i2 = integrals

    c_u = _ls(c_u)
    c116 = 3.0 * log_max(
        _ls(table["c1T"]) ** 2 * log_max(casc["c110"], c_a) ** 2 * log_max(1.0, c_p) ** 2,
        _ls(casc["c114"]) * c_u**2,
        _ls(casc["c115"]) * c_u**2,
    )
    c113 = log_max(
        c116,
        c_u**2
        * companion.c112
        * (1.0 + tau0**3)
        * (1.0 + loc.chi1_d1**2 / delta**2)
        * LogScalar(12.0 * delta * tau0),
    )

    c135 = float(casc["c135"])
    ln_c134 = c_u.ln + 0.5 * (
        math.log(r * companion.c1x)
        + math.log(8.0 / 3.0)
        + _ln_gamma(1.0 / alpha)
        - math.log(alpha)
        - (1.0 / alpha) * math.log(r**alpha * float(casc["c2x"]))
        - (1.0 / (alpha - 1.0)) * math.log(alpha * c135)
    )
    c134 = LogScalar(ln_c134)

    c130 = float(casc["c130"])
    k136 = 2.0 * companion.c101 * i1 + companion.c101 * math.sqrt(
        2.0 * (1.0 + c130**2) / min(1.0, c130**2 / 2.0)
    ) * (4.0 + i2)
    c136 = c113**0.5 * k136
    return log_max(c134, c136)


def aggregate_modulus_constants(
    table: Mapping[str, float],
    casc: Mapping[str, Value],
    op: OperatorBounds,
    loc: LocalizerProfile,
    companion: CompanionInputs,
    n_balls: int,
    theta: float,
) -> dict[str, Value]:
    """Final modulus constants via the per-ball recursion, in log space.

    Iterates the filtered-source prefactor over the covering, then assembles
    the additive constant c158 and the modulus constant
    c160 = (ln(1 + e^{c159}))^theta + 2^theta c158.
    """
    alpha = loc.alpha
    n = op.n
    r = table["r"]
    s = 2.0 / r  # derivative scale of the ball cut
    integrals = _decay_integrals(alpha, table["delta"], companion.c102)

    c152, c153 = float(casc["c152"]), float(casc["c153"])
    c107 = _ls(casc["comm_c107"])
    c108 = _ls(casc["comm_c108"])
    c107t = _ls(casc["wide_c107t"])

    # localizer-derivative norms of the commutator terms (chain-rule sups)
    b1s = s * loc.b_d1
    b2s = s**2 * loc.b_d2
    norm_p2b = (1.0 + n**2 * op.g_c0) * b2s + op.h_c0 * b1s
    norm_d0b_c1 = 2.0 * (b1s + b2s)
    norm_d0d0b = 2.0 * b2s
    norm_gdb_c1 = 2.0 * n * n * op.g_c1 * (b1s + b2s)
    norm_dgdb = 2.0 * (n**2 * op.g_c1 * b1s + n**2 * op.g_c0 * b2s)
    per_step_155 = norm_p2b + norm_d0b_c1 + norm_d0d0b + norm_gdb_c1 + norm_dgdb

    fixed_terms = (
        c153 * c107
        + c107 * (c152 * (1.0 + n**2 * op.g_c0 + op.h_c0))
        + c108 * c152
        + c107 * c152
        + c108 * (c152 * n**2 * op.g_c1)
        + c107 * (c152 * n**2 * op.g_c1)
    )

    def prefactor(c_a: Value) -> LogScalar:
        return local_prefactor(c152, c153, c_a, table, casc, loc, companion, integrals)

    c162 = LogScalar.of(1.0)
    c154 = c162 + c153 * c107t
    c155 = prefactor(c154)
    for _ in range(2, n_balls + 1):
        c162 = 2.0 * c162 + c155 * per_step_155 + fixed_terms
        c154 = c162 + c153 * c107t
        c155 = prefactor(c154)
        if c162.ln > _LN_CAP:
            raise Overflow("per-ball prefactor recursion left log-space range")

    c158 = n_balls * c155 + (
        3.0
        * n_balls
        * float(casc["c131"])
        * c152
        * (1.0 + loc.b_d1 / r)
        * _ls(casc["c156"]) ** (-alpha / (1.0 - alpha))
    )
    c159 = _ls(casc["c159"])
    log_term = softplus_of_large(c159) ** theta
    c160 = log_term + _ls(2.0) ** theta * c158

    return {
        "c154_N": c154,
        "c155_N": c155,
        "c162_N": c162,
        "c158": c158,
        "c160": c160,
    }


# ---------------------------------------------------------------------------
# assembled certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantRecord:
    """One row of the emitted constants table."""

    name: str
    formula_id: str
    direction: str  # "<=", ">=", or "=" relative to the defining formula
    value: float  # float value; inf when only the log form is finite
    ln_value: float
    inputs: tuple[str, ...]

    def mantissa_exponent(self) -> tuple[float, int]:
        return LogScalar(self.ln_value).mantissa_exponent()


@dataclass(frozen=True)
class CertificateConstants:
    """Every constant of the certificate, with directions and log values."""

    n: int
    alpha: float
    theta: float
    n_balls: int
    mode: str  # "theta-first" or "alpha-first"
    conditional_on: tuple[str, ...]
    records: tuple[ConstantRecord, ...]

    def __getitem__(self, name: str) -> float:
        for rec in self.records:
            if rec.name == name:
                return rec.value
        raise KeyError(name)

    def ln(self, name: str) -> float:
        for rec in self.records:
            if rec.name == name:
                return rec.ln_value
        raise KeyError(name)

    def values(self) -> dict[str, float]:
        return {rec.name: rec.value for rec in self.records}


_TABLE_DIRECTIONS = {
    "C3": ">=",
    "MP": "<=",
    "M1": ">=",
    "M2": ">=",
    "lam": ">=",
    "phi0": ">=",
    "phiM": "<=",
    "R1": "<=",
    "c100": ">=",
    "eps0": "<=",
    "R2": "<=",
    "sigma": ">=",
    "tau0": ">=",
    "R": "<=",
    "delta": "<=",
    "r": "<=",
    "c1T": ">=",
    "c133": ">=",
    "c2T": ">=",
}

_TABLE_INPUTS = {
    "C3": ("n", "g_c1", "psi_d1", "psi_d2"),
    "MP": (),
    "M1": ("MP", "C3", "a1", "p1"),
    "M2": ("MP", "C3", "M1", "a1", "b1"),
    "lam": ("M1", "psi_d2", "cl"),
    "phi0": (),
    "phiM": (),
    "R1": ("dist", "lam", "psi_d1"),
    "c100": ("n", "g_c1"),
    "eps0": ("n", "lam", "phiM", "psi_d1", "psi_d2", "L_max"),
    "R2": ("R1", "cl", "lam", "phiM", "c100", "M1", "M2", "eps0", "L_max"),
    "sigma": ("n", "L_max", "R2", "rho"),
    "tau0": ("M1", "lam", "phi0", "g_c0", "h_c0", "q_c0", "f_d1_bound", "f_d2_bound"),
    "R": ("R2",),
    "delta": ("cT", "R2", "rho"),
    "r": ("n", "lam", "cl", "R2", "phiM", "psi_d1", "cT"),
    "c1T": ("M1", "tau0", "lam", "phi0"),
    "c133": ("n", "g_c0", "chi1_d1", "chi1_d2", "tau0", "R", "lam", "phiM", "h_c0"),
    "c2T": ("M2", "chi1_d1", "tau0", "R", "c1T", "c133"),
}


def build_certificate_constants(
    op: OperatorBounds,
    psi: PsiData,
    loc: LocalizerProfile,
    companion: CompanionInputs | None = None,
    *,
    n_balls: int,
    theta: float | None = None,
    alpha: float | None = None,
) -> CertificateConstants:
    """Run the whole pipeline and emit the assembled constants table.

    Exactly one of ``theta`` / ``alpha`` selects the mode: theta-first sets
    alpha = theta^(1/N) before the alpha-dependent stages; alpha-first uses
    the profile exponent alpha and reports theta = alpha^N.
    """
    companion = CompanionInputs() if companion is None else companion
    if (theta is None) == (alpha is None):
        raise ParameterOrder("specify exactly one of theta (theta-first) or alpha (alpha-first)")
    if theta is not None:
        if not 0.0 < theta < 1.0:
            raise ParameterOrder("theta must lie in (0, 1)")
        mode = "theta-first"
        alpha = theta ** (1.0 / n_balls)
    else:
        mode = "alpha-first"
        if not 0.0 < alpha < 1.0:
            raise AlphaOutOfRange("alpha must lie strictly between 0 and 1")
        theta = alpha**n_balls
    loc = replace(loc, alpha=alpha)

    pseudo = pseudoconvexity_constants(op, psi)
    radii = radii_constants(pseudo, op, psi)
    table: dict[str, float] = {**pseudo, **radii}
    table.update(carleman_constants(table, op, loc, psi))

    casc = cascade_constants(table, op, loc, companion, n_balls)
    agg = aggregate_modulus_constants(table, casc, op, loc, companion, n_balls, theta)

    c170 = LogScalar(
        math.log(psi.vol)
        - math.log(unit_ball_volume(psi.n + 1))
        - (psi.n + 1)
        * (math.log(table["r"]) - math.log(4.0 * math.sqrt(max(op.b1, 1.0))))
    )

    records: list[ConstantRecord] = []

    def add(name: str, value: Value, formula_id: str, direction: str = "=", inputs: tuple[str, ...] = ()) -> None:
        ls_val = _ls(value)
        records.append(
            ConstantRecord(
                name=name,
                formula_id=formula_id,
                direction=direction,
                value=ls_val.to_float(),
                ln_value=ls_val.ln,
                inputs=inputs,
            )
        )

    table_order = [
        "C3", "MP", "M1", "M2", "lam", "phi0", "phiM", "R1",
        "c100", "eps0", "R2", "sigma", "tau0", "R", "delta", "r",
        "c1T", "c2T", "c133",
    ]
    for name in table_order:
        add(name, table[name], f"table-{name}", _TABLE_DIRECTIONS[name], _TABLE_INPUTS[name])

    for key in ("c_f1", "c_f2", "c_f3", "c_Df2", "c_Df3", "c_comm", "c3", "c117", "c106", "c107"):
        add(f"comm_{key}", casc[f"comm_{key}"], f"filter-comm-{key}", "=", ("alpha", "c1_b", "r"))
    for key in ("c3t", "c117t", "c106t", "c107t"):
        add(f"wide_{key}", casc[f"wide_{key}"], f"filter-wide-{key}", "=", ("alpha", "c1_b", "R"))
    add("beta", casc["beta"], "filter-wide-beta", "=", ("alpha", "c1_b", "R"))

    chain = [
        ("c2x", ("n_balls", "c1x")),
        ("c119", ("delta", "c1x")),
        ("B", ("delta", "c1x")),
        ("c120", ("B", "alpha")),
        ("c121", ("c119", "c120", "alpha")),
        ("c122", ("c118", "c121", "c1x", "R")),
        ("c123", ("c122", "alpha")),
        ("c128", ("c123", "alpha")),
        ("c110", ("c122", "c123", "c128", "alpha")),
        ("c109", ("eps0", "delta", "c128")),
        ("c130", ("c109", "delta")),
        ("c131", ("eps0", "delta", "c123", "alpha")),
        ("c135", ("r", "c2x", "alpha")),
        ("c137", ("c102", "delta", "c130", "alpha")),
        ("c132", ("c135", "c137")),
        ("c164", ("comm_c107",)),
        ("c165", ("comm_c117", "beta", "alpha")),
        ("c152", ("n_balls", "b_d1", "r")),
        ("c153", ("n_balls", "g_c0", "h_c0", "b_d1", "b_d2", "r")),
        ("c156", ("beta", "c131", "c132", "c165", "comm_c106", "alpha")),
        ("c159", ("c156", "alpha", "n_balls")),
        ("c114", ("c1T", "g_c1", "chi1_c2", "f_d1_bound", "f_d2_bound", "delta")),
        ("c115", ("c2T", "f_d1_bound", "delta", "chi1_d1")),
    ]
    for name, inputs in chain:
        add(name, casc[name], f"cascade-{name}", "=", inputs)

    for name, inputs in (
        ("c154_N", ("c162_N", "c153", "wide_c107t")),
        ("c155_N", ("c152", "c153", "c154_N")),
        ("c158", ("n_balls", "c155_N", "c131", "c152", "b_d1", "r", "c156", "alpha")),
        ("c160", ("c159", "c158", "theta")),
    ):
        add(name, agg[name], f"aggregate-{name}", "=", inputs)

    add("c170", c170, "covering-bound", "=", ("vol", "r", "b1", "n"))

    return CertificateConstants(
        n=psi.n,
        alpha=alpha,
        theta=theta,
        n_balls=n_balls,
        mode=mode,
        conditional_on=companion.defaults_in_use(),
        records=tuple(records),
    )
