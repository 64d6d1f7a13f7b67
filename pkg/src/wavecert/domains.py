"""Hyperbolic functions, influence domains, and cut-locus recentering.

The stability estimate propagates smallness through space-time sets carved
out by the hyperbolic function

    psi(t, x; T, z) = (T - d_g(x, z))^2 - t^2,

whose superlevel sets approximate the domain of influence of a cylinder
around z.  This module builds the sets

    Sigma(z, l, T)   slab-truncated influence cone  {|t| <= T-l, |t| <= T-d},
    S(z, T, l, g)    superlevel set {|t| <= T-l, psi >= g^2, d <= T},
    W(z, l, T)       cylinder (|t| <= T-l) x {d <= l},
    Lambda = S \\ W,  Omega_0/2/3 annular variants,

verifies the inclusion chain and the level-set gap lemma numerically, and
performs the recentering (z_hat, T_hat) that replaces a center whose
distance function may have lost smoothness past the injectivity radius.

All set predicates use closed inequalities; boundary samples count as
inside.  Supersets in proven inclusions get a 1e-9 absolute slack so exact
float ties cannot register as violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyRegion, GeometryViolated, ParameterOrder
from .metric import (
    Geodesic,
    GeodesicField,
    geodesic_distance,
    minimizing_geodesic,
    point_at_distance,
)

__all__ = [
    "HyperbolicFunction",
    "InfluenceSets",
    "OmegaSets",
    "InclusionReport",
    "GapReport",
    "SeparationReport",
    "RecenterResult",
    "PsiRegularityReport",
    "psi_eval",
    "t_ell_gamma",
    "influence_sets",
    "omega_sets",
    "check_inclusions",
    "level_set_gap",
    "empirical_level_gap",
    "lambda_omega0_separation",
    "omega_separation",
    "recenter",
    "psi_regularity_report",
]

_SLACK = 1e-9  # absolute slack on the superset side of proven inclusions


# --------------------------------------------------------------------------
# the hyperbolic function
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HyperbolicFunction:
    """psi(t, x) = (T - d_g(x, z))^2 - t^2 for one center and horizon."""

    geo: GeodesicField
    T: float

    @property
    def z(self) -> np.ndarray:
        return self.geo.z

    def value_nodes(self, times: np.ndarray) -> np.ndarray:
        """psi on the space-time node lattice, shape (n_times, *space)."""
        t = np.asarray(times, dtype=float)
        d = self.geo.d
        return (self.T - d)[None, ...] ** 2 - (t**2).reshape((-1,) + (1,) * d.ndim)

    def value_at(self, t: float, x: Sequence[float]) -> float:
        d = float(self.geo.interp(np.atleast_2d(np.asarray(x, dtype=float)))[0])
        return (self.T - d) ** 2 - t * t


def psi_eval(H: HyperbolicFunction, y: tuple) -> float:
    """Evaluate psi at a space-time point y = (t, x)."""
    t, x = y
    return H.value_at(float(t), np.atleast_1d(x))


def t_ell_gamma(T: float, ell: float, gamma: float) -> float:
    """Shrunk horizon T_{l,g} = sqrt((T-l)^2 - g^2) + l of the middle cone."""
    if gamma > T - ell:
        raise ParameterOrder(f"gamma = {gamma} exceeds T - ell = {T - ell}")
    return math.sqrt((T - ell) ** 2 - gamma**2) + ell


# --------------------------------------------------------------------------
# influence sets on the space-time lattice
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InfluenceSets:
    """Membership grids for one (z0, l, T, gamma) on times x space nodes."""

    geo: GeodesicField
    times: np.ndarray
    ell: float
    T: float
    gamma: float
    psi: np.ndarray              # (n_times, *space)
    s_set: np.ndarray            # S(z, T, l, gamma)
    sigma: np.ndarray            # Sigma(z, l, T)
    sigma_inner: np.ndarray      # Sigma(z, l, T - gamma)
    sigma_middle: np.ndarray     # Sigma(z, l, T_{l,gamma})
    w_set: np.ndarray            # closed cylinder W
    lam: np.ndarray              # Lambda = S \ W
    omega0: np.ndarray           # S(gamma/sqrt2) minus the l/4 cylinder
    omega2: Optional[np.ndarray] = None
    omega3: Optional[np.ndarray] = None

    @property
    def z0(self) -> np.ndarray:
        return self.geo.z

    @property
    def t_lg(self) -> float:
        return t_ell_gamma(self.T, self.ell, self.gamma)

    def sigma_mask(self, T_prime: float, slack: float = 0.0) -> np.ndarray:
        """Sigma(z, l, T') = {|t| <= T'-l} cap {|t| <= T'-d} on the lattice."""
        abs_t = np.abs(self.times).reshape((-1,) + (1,) * self.geo.d.ndim)
        d = self.geo.d[None, ...]
        return (abs_t <= T_prime - self.ell + slack) & (abs_t <= T_prime - d + slack)

    def s_mask(self, gamma_val: float, slack: float = 0.0) -> np.ndarray:
        """S(z, T, l, gamma_val) superlevel set on the lattice."""
        abs_t = np.abs(self.times).reshape((-1,) + (1,) * self.geo.d.ndim)
        d = self.geo.d[None, ...]
        return (
            (abs_t <= self.T - self.ell + slack)
            & (self.psi >= gamma_val**2 - slack)
            & (d <= self.T + slack)
        )

    def with_omegas(self, om: "OmegaSets") -> "InfluenceSets":
        return replace(self, omega2=om.omega2, omega3=om.omega3)


def influence_sets(
    geo: GeodesicField,
    times: np.ndarray,
    ell: float,
    T: float,
    gamma: float,
    enforce_small_cylinder: bool = False,
) -> InfluenceSets:
    """Build the membership grids, validating the parameter orderings.

    The inclusion and gap lemmas need only T > l and 0 < gamma <= T - l;
    the stricter cylinder condition l <= i0/4 (needed when the sets feed
    the recentered certificate) is enforced on request.
    """
    if enforce_small_cylinder and ell > geo.metric.i0 / 4.0:
        raise GeometryViolated(f"ell = {ell} exceeds i0/4 = {geo.metric.i0 / 4.0}")
    if not T > ell:
        raise ParameterOrder(f"T = {T} must exceed ell = {ell}")
    if not 0.0 < gamma <= T - ell:
        raise ParameterOrder(f"gamma = {gamma} must lie in (0, T - ell]")

    times = np.asarray(times, dtype=float)
    H = HyperbolicFunction(geo=geo, T=T)
    psi = H.value_nodes(times)
    abs_t = np.abs(times).reshape((-1,) + (1,) * geo.d.ndim)
    d = geo.d[None, ...]
    t_lg = t_ell_gamma(T, ell, gamma)

    sigma = (abs_t <= T - ell) & (abs_t <= T - d)
    sigma_inner = (abs_t <= (T - gamma) - ell) & (abs_t <= (T - gamma) - d)
    sigma_middle = (abs_t <= t_lg - ell) & (abs_t <= t_lg - d)
    s_set = (abs_t <= T - ell) & (psi >= gamma**2) & (d <= T)
    w_set = (abs_t <= T - ell) & (d <= ell)
    lam = s_set & ~w_set
    s_half = (abs_t <= T - ell) & (psi >= gamma**2 / 2.0) & (d <= T)
    omega0 = s_half & (d >= ell / 4.0)

    return InfluenceSets(
        geo=geo,
        times=times,
        ell=ell,
        T=T,
        gamma=gamma,
        psi=psi,
        s_set=s_set,
        sigma=sigma,
        sigma_inner=sigma_inner,
        sigma_middle=sigma_middle,
        w_set=w_set,
        lam=lam,
        omega0=omega0,
    )


@dataclass(frozen=True)
class OmegaSets:
    """Annular propagation sets for a recentered hyperbolic function."""

    geo_hat: GeodesicField
    times: np.ndarray
    T_hat: float
    ell: float
    gamma: float
    omega2: np.ndarray
    omega3: np.ndarray
    nested_ok: bool              # Omega_2 subset of Omega_3 on the lattice


def omega_sets(
    geo_hat: GeodesicField, times: np.ndarray, T_hat: float, ell: float, gamma: float
) -> OmegaSets:
    """Omega_2 = S(gamma) on the [l, 5i0/8] annulus; Omega_3 = S(gamma/sqrt2)
    on the wider [l/4, 7i0/8] annulus."""
    i0 = geo_hat.metric.i0
    times = np.asarray(times, dtype=float)
    psi = HyperbolicFunction(geo=geo_hat, T=T_hat).value_nodes(times)
    abs_t = np.abs(times).reshape((-1,) + (1,) * geo_hat.d.ndim)
    d = geo_hat.d[None, ...]

    s_full = (abs_t <= T_hat - ell) & (psi >= gamma**2) & (d <= T_hat)
    s_half = (abs_t <= T_hat - ell) & (psi >= gamma**2 / 2.0) & (d <= T_hat)
    omega2 = s_full & (d >= ell) & (d <= 5.0 * i0 / 8.0)
    omega3 = s_half & (d >= ell / 4.0) & (d <= 7.0 * i0 / 8.0)
    nested_ok = not np.any(omega2 & ~omega3)
    return OmegaSets(
        geo_hat=geo_hat,
        times=times,
        T_hat=T_hat,
        ell=ell,
        gamma=gamma,
        omega2=omega2,
        omega3=omega3,
        nested_ok=nested_ok,
    )


# --------------------------------------------------------------------------
# inclusion chain
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InclusionReport:
    """Violation counts for Sigma(T-g) in S in Sigma(T_lg) u W in Sigma(T)."""

    n_nodes: int
    n_samples: int
    t_lg: float
    node_violations: tuple[int, int, int]      # per chain link
    sample_violations: tuple[int, int, int]
    cylinder_violations: int                   # W not inside Sigma(T)
    violating_points: tuple[tuple[float, ...], ...]

    @property
    def total_violations(self) -> int:
        return (
            sum(self.node_violations)
            + sum(self.sample_violations)
            + self.cylinder_violations
        )


def check_inclusions(
    sets: InfluenceSets, n_samples: int = 100_000, seed: int = 0
) -> InclusionReport:
    """Count chain violations over every lattice node and random continuum
    samples with interpolated distance.  Violations are data, not errors."""
    t_lg = sets.t_lg

    viol_a = sets.sigma_inner & ~sets.s_mask(sets.gamma, slack=_SLACK)
    middle_wide = sets.sigma_mask(t_lg, slack=_SLACK)
    w_wide_abs_t = np.abs(sets.times).reshape((-1,) + (1,) * sets.geo.d.ndim)
    w_wide = (w_wide_abs_t <= sets.T - sets.ell + _SLACK) & (
        sets.geo.d[None, ...] <= sets.ell + _SLACK
    )
    viol_b = sets.s_set & ~(middle_wide | w_wide)
    viol_c = (sets.sigma_middle | sets.w_set) & ~sets.sigma_mask(sets.T, slack=_SLACK)
    viol_w = sets.w_set & ~sets.sigma_mask(sets.T, slack=_SLACK)

    points: list[tuple[float, ...]] = []
    for viol in (viol_a, viol_b, viol_c):
        for idx in np.argwhere(viol)[:8]:
            t = float(sets.times[idx[0]])
            x = tuple(
                float(sets.geo.metric.axes[k][idx[k + 1]])
                for k in range(sets.geo.metric.n)
            )
            points.append((t,) + x)

    # continuum samples: uniform over the slab x grid box, interpolated d_g
    rng = np.random.default_rng(seed)
    axes = sets.geo.metric.axes
    t_span = float(np.max(np.abs(sets.times)))
    ts = rng.uniform(-t_span, t_span, n_samples)
    xs = np.column_stack(
        [rng.uniform(ax[0], ax[-1], n_samples) for ax in axes]
    )
    d = sets.geo.interp(xs)
    abs_t = np.abs(ts)
    psi = (sets.T - d) ** 2 - ts**2
    T, ell, gamma = sets.T, sets.ell, sets.gamma

    in_sigma_inner = (abs_t <= (T - gamma) - ell) & (abs_t <= (T - gamma) - d)
    in_s = (abs_t <= T - ell) & (psi >= gamma**2) & (d <= T)
    in_s_wide = (
        (abs_t <= T - ell + _SLACK) & (psi >= gamma**2 - _SLACK) & (d <= T + _SLACK)
    )
    in_middle = (abs_t <= t_lg - ell) & (abs_t <= t_lg - d)
    in_middle_wide = (abs_t <= t_lg - ell + _SLACK) & (abs_t <= t_lg - d + _SLACK)
    in_w = (abs_t <= T - ell) & (d <= ell)
    in_w_wide = (abs_t <= T - ell + _SLACK) & (d <= ell + _SLACK)
    in_sigma_wide = (abs_t <= T - ell + _SLACK) & (abs_t <= T - d + _SLACK)

    samp_a = int(np.count_nonzero(in_sigma_inner & ~in_s_wide))
    samp_b = int(np.count_nonzero(in_s & ~(in_middle_wide | in_w_wide)))
    samp_c = int(np.count_nonzero((in_middle | in_w) & ~in_sigma_wide))

    return InclusionReport(
        n_nodes=int(sets.s_set.size),
        n_samples=n_samples,
        t_lg=t_lg,
        node_violations=(
            int(np.count_nonzero(viol_a)),
            int(np.count_nonzero(viol_b)),
            int(np.count_nonzero(viol_c)),
        ),
        sample_violations=(samp_a, samp_b, samp_c),
        cylinder_violations=int(np.count_nonzero(viol_w)),
        violating_points=tuple(points),
    )


# --------------------------------------------------------------------------
# level-set gap and separations
# --------------------------------------------------------------------------


def level_set_gap(T: float, ell: float, gamma: float) -> float:
    """Certified gap gamma^2 / (8 (T - l)) between the gamma and gamma/sqrt2
    level boundaries of S outside the l-cylinder."""
    if not T > ell:
        raise ParameterOrder(f"T = {T} must exceed ell = {ell}")
    if not 0.0 <= gamma <= T - ell:
        raise ParameterOrder(f"gamma = {gamma} must lie in [0, T - ell]")
    return gamma**2 / (8.0 * (T - ell))


def _adjacent_to(mask: np.ndarray) -> np.ndarray:
    """Nodes having an axis neighbor inside ``mask``."""
    out = np.zeros_like(mask)
    nd = mask.ndim
    for ax in range(nd):
        fwd = [slice(None)] * nd
        bwd = [slice(None)] * nd
        fwd[ax] = slice(1, None)
        bwd[ax] = slice(0, -1)
        out[tuple(fwd)] |= mask[tuple(bwd)]
        out[tuple(bwd)] |= mask[tuple(fwd)]
    return out


def _mask_points(
    mask: np.ndarray, times: np.ndarray, axes: Sequence[np.ndarray]
) -> np.ndarray:
    idx = np.argwhere(mask)
    cols = [times[idx[:, 0]]]
    cols += [axes[k][idx[:, k + 1]] for k in range(len(axes))]
    return np.column_stack(cols)


@dataclass(frozen=True)
class GapReport:
    c180: float
    empirical_min: float
    grid_step: float
    n_inner: int
    n_outer: int
    ok: bool


def empirical_level_gap(sets: InfluenceSets) -> GapReport:
    """Measured min distance between sampled boundary nodes of the gamma and
    gamma/sqrt2 superlevel sets outside the l-cylinder.

    The inner sample band lies on the {psi >= gamma^2} side of its level,
    the outer band on the {psi <= gamma^2/2} side of the other, so every
    sampled pair straddles both surfaces and its true separation is at
    least the lemma's surface-to-surface gap.  The product metric
    max(|dt|, d_g) is bounded below on pairs by max(|dt|, sqrt(a0) |dx|),
    a Chebyshev query in scaled coordinates.
    """
    c180 = level_set_gap(sets.T, sets.ell, sets.gamma)
    geo = sets.geo
    abs_t = np.abs(sets.times).reshape((-1,) + (1,) * geo.d.ndim)
    slab = abs_t <= sets.T - sets.ell
    outside_cyl = geo.d[None, ...] > sets.ell

    level_full = sets.gamma**2
    level_half = sets.gamma**2 / 2.0
    inside_full = sets.psi >= level_full
    below_half = sets.psi <= level_half
    band_full = inside_full & _adjacent_to(~inside_full) & slab & outside_cyl
    band_half = below_half & _adjacent_to(~below_half) & slab & outside_cyl
    if not np.any(band_full) or not np.any(band_half):
        raise EmptyRegion("a level boundary has no sampled nodes")

    scale = math.sqrt(geo.metric.a0)
    pts_full = _mask_points(band_full, sets.times, geo.metric.axes)
    pts_half = _mask_points(band_half, sets.times, geo.metric.axes)
    pts_full[:, 1:] *= scale
    pts_half[:, 1:] *= scale
    tree = cKDTree(pts_half)
    dists, _ = tree.query(pts_full, p=np.inf)
    empirical = float(np.min(dists))

    h = max(float(sets.times[1] - sets.times[0]), max(geo.metric.spacing))
    return GapReport(
        c180=c180,
        empirical_min=empirical,
        grid_step=h,
        n_inner=int(np.count_nonzero(band_full)),
        n_outer=int(np.count_nonzero(band_half)),
        ok=empirical >= c180 - 2.0 * h,
    )


@dataclass(frozen=True)
class SeparationReport:
    bound: float
    measured: float
    tol: float
    n_inner: int
    n_boundary: int
    ok: bool


def _euclidean_separation(
    inner: np.ndarray,
    outer_region: np.ndarray,
    times: np.ndarray,
    axes: Sequence[np.ndarray],
    bound: float,
    tol: float,
) -> SeparationReport:
    """Min Euclidean space-time distance from ``inner`` nodes to the sampled
    boundary of ``outer_region`` (outside-adjacent nodes)."""
    boundary = ~outer_region & _adjacent_to(outer_region)
    if not np.any(inner) or not np.any(boundary):
        raise EmptyRegion("separation check needs nonempty node sets")
    pts_a = _mask_points(inner, times, axes)
    pts_b = _mask_points(boundary, times, axes)
    tree = cKDTree(pts_b)
    dists, _ = tree.query(pts_a)
    measured = float(np.min(dists))
    return SeparationReport(
        bound=bound,
        measured=measured,
        tol=tol,
        n_inner=pts_a.shape[0],
        n_boundary=pts_b.shape[0],
        ok=measured >= bound - tol,
    )


def lambda_omega0_separation(sets: InfluenceSets) -> SeparationReport:
    """Euclidean gap between Lambda and the boundary of Omega_0, certified
    at b0^{-1/2} min{c180, 3l/4}."""
    c180 = level_set_gap(sets.T, sets.ell, sets.gamma)
    bound = min(c180, 3.0 * sets.ell / 4.0) / math.sqrt(sets.geo.metric.b0)
    h = max(float(sets.times[1] - sets.times[0]), max(sets.geo.metric.spacing))
    return _euclidean_separation(
        sets.lam, sets.omega0, sets.times, sets.geo.metric.axes, bound, 2.0 * h
    )


def omega_separation(om: OmegaSets, T: float) -> SeparationReport:
    """Euclidean gap between Omega_2 and the boundary of Omega_3, certified
    at b0^{-1/2} min{i0/4, c180, 3l/4} with the original horizon's c180."""
    i0 = om.geo_hat.metric.i0
    c180 = level_set_gap(T, om.ell, om.gamma)
    bound = min(i0 / 4.0, c180, 3.0 * om.ell / 4.0) / math.sqrt(om.geo_hat.metric.b0)
    h = max(float(om.times[1] - om.times[0]), max(om.geo_hat.metric.spacing))
    return _euclidean_separation(
        om.omega2, om.omega3, om.times, om.geo_hat.metric.axes, bound, 2.0 * h
    )


# --------------------------------------------------------------------------
# recentering
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RecenterResult:
    """Replacement center for a target past the smooth annulus of z0."""

    z_hat: np.ndarray
    T_hat: float
    psi_hat: HyperbolicFunction
    case: str                  # "a" (unchanged) or "b" (moved along geodesic)
    L_hat: float
    d_origin: float            # d_g(z0, x_hat)
    path: Optional[Geodesic]


def recenter(
    geo_z0: GeodesicField,
    T: float,
    x_hat: Sequence[float],
    ell: Optional[float] = None,
    gamma: Optional[float] = None,
    geo_cache: Optional[dict] = None,
) -> RecenterResult:
    """Move the center toward x_hat when d_g(z0, x_hat) > 7 i0 / 8.

    Case (a), d <= 7i0/8: the original (z0, T) already serves; returned
    unchanged (boundary equality included, up to the marching tolerance).
    Case (b): the new center sits
    at arclength L_hat = d - i0/4 from z0 along a minimizing geodesic to
    x_hat, with shrunk horizon T_hat = T - L_hat, so the target lands at
    distance i0/4 from z_hat and the pair satisfies T_hat > gamma + ell.

    ``geo_cache`` maps snapped center nodes to already-solved distance
    fields, letting batch callers reuse fast-marching solves.
    """
    field = geo_z0.metric
    x_hat = np.asarray(x_hat, dtype=float)
    d = float(geo_z0.interp(x_hat[None, :])[0])
    if ell is not None and d < ell - geo_z0.tol:
        raise GeometryViolated(
            f"target at distance {d:.4g} lies inside the ell = {ell} cylinder"
        )
    i0 = field.i0
    # the grid-read distance at an exactly-boundary target can exceed the
    # analytic value by the marching scheme error, so case (a) absorbs it
    if d <= 7.0 * i0 / 8.0 + geo_z0.tol:
        return RecenterResult(
            z_hat=geo_z0.z.copy(),
            T_hat=T,
            psi_hat=HyperbolicFunction(geo=geo_z0, T=T),
            case="a",
            L_hat=0.0,
            d_origin=d,
            path=None,
        )

    path = minimizing_geodesic(geo_z0, x_hat)
    z_raw = point_at_distance(path, d - i0 / 4.0)
    z_idx = field.nearest_node(z_raw)
    z_hat = field.node_coords(z_idx)
    # re-read L_hat at the snapped node so T_hat compensates the distance
    # actually travelled, keeping psi(y; T_hat, z_hat) = psi(y; T, z0) on
    # the connecting geodesic to second order in the snap offset
    L_hat = float(geo_z0.d[z_idx])
    T_hat = T - L_hat
    if gamma is not None and ell is not None and not T_hat > gamma + ell:
        raise GeometryViolated(
            f"recentered horizon T_hat = {T_hat:.4g} fails T_hat > gamma + ell"
        )

    if geo_cache is not None and z_idx in geo_cache:
        geo_hat = geo_cache[z_idx]
    else:
        geo_hat = geodesic_distance(field, z_hat)
        if geo_cache is not None:
            geo_cache[z_idx] = geo_hat
    return RecenterResult(
        z_hat=z_hat,
        T_hat=T_hat,
        psi_hat=HyperbolicFunction(geo=geo_hat, T=T_hat),
        case="b",
        L_hat=L_hat,
        d_origin=d,
        path=path,
    )


# --------------------------------------------------------------------------
# regularity of psi on the annulus
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiRegularityReport:
    """Measured pseudoconvexity and derivative sups of psi over a region."""

    gamma_i: float
    n_nodes: int
    p_min: float
    p_bound: float
    p_ok: bool
    grad_min: float
    grad_bound: float
    grad_ok: bool
    sup_psi1: float
    sup_psi2: float
    sup_psi3: float
    b4: float
    derivative_ok: tuple[bool, bool, bool]


def psi_regularity_report(
    H: HyperbolicFunction,
    region: np.ndarray,
    times: np.ndarray,
    gamma_i: float,
    ell: float,
    fd_tol: float = 0.1,
    fd_guard_steps: float = 4.0,
) -> PsiRegularityReport:
    """Verify, over region nodes, the symbol bound p(y, dpsi) >= 4 gamma_i^2,
    the gradient floor |dpsi| >= 2 gamma_i / sqrt(b0), and the three
    derivative sups with the smallest admissible uniform constant b4.

    Space derivatives of psi are assembled from finite differences of d_g
    through the exact product formulas (the time dependence is polynomial),
    so quotient noise does not enter twice.  The pointwise lower-bound
    checks skip nodes within ``fd_guard_steps`` grid steps of the center,
    where centered differences straddle the cone tip and underestimate the
    eikonal gradient; the derivative sups use the full region.
    """
    region = np.asarray(region, dtype=bool)
    if not np.any(region):
        raise EmptyRegion("regularity region contains no nodes")
    field = H.geo.metric
    n = field.n
    hs = field.spacing
    d = H.geo.d
    t = np.asarray(times, dtype=float).reshape((-1,) + (1,) * n)

    d1 = np.gradient(d, *hs, edge_order=2)
    if n == 1:
        d1 = [d1]
    d2 = [np.gradient(a, *hs, edge_order=2) for a in d1]
    if n == 1:
        d2 = [[a] for a in d2]
    d3 = [[np.gradient(b, *hs, edge_order=2) for b in row] for row in d2]
    if n == 1:
        d3 = [[[b] for b in row] for row in d3]

    Tmd = H.T - d

    # first derivatives: (-2t, -2(T-d) grad d)
    grad_sq = np.zeros(region.shape)
    for j in range(n):
        comp = (-2.0 * Tmd * d1[j])[None, ...]
        grad_sq = grad_sq + np.broadcast_to(comp**2, region.shape)
    grad_sq = grad_sq + np.broadcast_to((2.0 * t) ** 2, region.shape)
    grad_norm = np.sqrt(grad_sq)

    # principal symbol p(y, dpsi) = 4 (T-d)^2 g^{jk} d_j d d_k d - 4 t^2
    quad = np.zeros(d.shape)
    for j in range(n):
        for k in range(n):
            quad = quad + field.g_inv[..., j, k] * d1[j] * d1[k]
    p_vals = np.broadcast_to(
        (4.0 * Tmd**2 * quad)[None, ...], region.shape
    ) - np.broadcast_to(4.0 * t**2, region.shape)

    guard = (d >= fd_guard_steps * max(hs))[None, ...]
    check_region = region & np.broadcast_to(guard, region.shape)
    if not np.any(check_region):
        check_region = region
    p_min = float(np.min(p_vals[check_region]))
    grad_min = float(np.min(grad_norm[check_region]))
    p_bound = 4.0 * gamma_i**2
    grad_bound = 2.0 * gamma_i / math.sqrt(field.b0)

    # derivative sups assembled from the product formulas; the second- and
    # third-order entries do not depend on t, so sup over the space shadow
    space_region = np.any(region, axis=0)
    sup_psi1 = float(np.max(grad_norm[region]))
    sup2 = 2.0  # the exact d_t^2 psi entry
    for j in range(n):
        for k in range(n):
            entry = -2.0 * Tmd * d2[j][k] + 2.0 * d1[j] * d1[k]
            sup2 = max(sup2, float(np.max(np.abs(entry[space_region]))))
    sup_psi2 = sup2
    sup3 = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                entry = (
                    -2.0 * Tmd * d3[j][k][l]
                    + 4.0 * d1[j] * d2[k][l]
                    + 2.0 * d2[j][k] * d1[l]
                )
                sup3 = max(sup3, float(np.max(np.abs(entry[space_region]))))
    sup_psi3 = sup3

    inv_q = 4.0 / ell  # (l/4)^{-1}
    T1 = H.T + 1.0
    b4 = max(
        sup_psi1 / T1,
        sup_psi2 / (T1 * (inv_q + 1.0)),
        sup_psi3 / (T1 * (inv_q**2 + inv_q)),
    )

    # cross-check the product-form majorizations against measured d_g norms
    c0 = float(np.max(d[space_region]))
    c1 = max(c0, max(float(np.max(np.abs(a[space_region]))) for a in d1))
    c2 = max(c1, max(float(np.max(np.abs(b[space_region]))) for row in d2 for b in row))
    c3 = max(
        c2,
        max(
            float(np.max(np.abs(c[space_region])))
            for row in d3
            for brow in row
            for c in brow
        ),
    )
    margin = 1.0 + fd_tol
    der_ok = (
        sup_psi1 <= 4.0 * T1 * c1 * margin,
        sup_psi2 <= 4.0 * T1 * (c2 + c1**2) * margin,
        sup_psi3 <= 6.0 * T1 * (c3 + c1 * c2) * margin,
    )

    return PsiRegularityReport(
        gamma_i=gamma_i,
        n_nodes=int(np.count_nonzero(region)),
        p_min=p_min,
        p_bound=p_bound,
        p_ok=p_min >= p_bound * (1.0 - fd_tol),
        grad_min=grad_min,
        grad_bound=grad_bound,
        grad_ok=grad_min * math.sqrt(field.b0) / (2.0 * gamma_i) >= 1.0 - fd_tol,
        sup_psi1=sup_psi1,
        sup_psi2=sup_psi2,
        sup_psi3=sup_psi3,
        b4=b4,
        derivative_ok=der_ok,
    )
