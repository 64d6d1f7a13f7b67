"""Greedy argmax coverings, recentered influence centers, and cut-off masks.

The propagation argument walks a covering of the annular set Lambda built by
one deterministic rule: among the still-uncovered grid nodes, pick the one
with the largest hyperbolic-function value (ties within a relative 1e-12
broken by lexicographic node index), remove its r/2-neighborhood, repeat.
This module implements that rule, the per-center recentering bookkeeping
(``influence_cover``), the multiplier masks m_j = prod_{k<j}(1 - b_k), and
the post-hoc invariant checks (separation, coverage, monotone psi values,
count bounds).

Node-sampled semantics throughout: set membership, neighborhood removal, and
the escape check all quantify over lattice nodes, an inner approximation of
the continuum rule whose gap vanishes with the grid spacing.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .domains import HyperbolicFunction, InfluenceSets, influence_sets, recenter
from .errors import (
    EmptyRegion,
    GeometryViolated,
    NonPositiveInput,
    ParameterOrder,
    SupportConditionViolated,
    TargetEscapesOmega0,
)
from .gevrey import bump
from .metric import GeodesicField

__all__ = [
    "CoveringCenter",
    "Covering",
    "CoveringReport",
    "SupportReport",
    "InfluenceCovering",
    "CutMaskSequence",
    "greedy_cover",
    "influence_cover",
    "cut_masks",
    "check_cut_masks",
    "covering_report",
    "ball_count_bound",
    "cylinder_count_bound",
    "influence_radius_cap",
    "measure_volume",
    "export_covering_csv",
]

_TIE_REL = 1e-12  # relative psi window treated as a tie


# ---------------------------------------------------------------------------
# covering data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoveringCenter:
    """One selected center y_j = (t_j, x_j) with its certificate data."""

    j: int                      # 1-based selection order
    t: float
    x: np.ndarray               # (n,) spatial coordinates
    psi_value: float            # psi(y_j; T, z0) at selection time
    z: np.ndarray               # (n,) certifying center (z0 or recentered)
    T: float                    # certifying horizon (T or shrunk)
    gamma: float                # sqrt(psi_value) for influence covers, else nan
    recentered: bool
    d_origin: float = math.nan  # d_g(z0, x_j) when known
    psi_discrepancy: float = math.nan  # |psi(y_j;T_j,z_j) - psi(y_j;T,z0)|

    @property
    def y(self) -> np.ndarray:
        return np.concatenate(([self.t], self.x))


@dataclass(frozen=True)
class Covering:
    """Ordered greedy covering with its radii and effective psi floor."""

    mode: str                   # "ball" or "cylinder"
    r: float                    # effective small radius (after any cap)
    R: float                    # effective large radius (after any cap)
    centers: tuple[CoveringCenter, ...]
    psi_min_attained: float
    r_requested: float
    R_requested: float

    @property
    def N(self) -> int:
        return len(self.centers)

    @property
    def n_space(self) -> int:
        return len(self.centers[0].x)

    def center_array(self) -> np.ndarray:
        """(N, 1+n) array of the space-time center coordinates."""
        return np.array([c.y for c in self.centers], dtype=float)

    def serialize(self) -> bytes:
        """Canonical byte serialization of the ordered center table.

        Two runs on identical inputs must produce identical bytes; the body
        is little-endian float64 rows (j, t, x..., psi, z..., T, gamma,
        recentered).
        """
        n = self.n_space
        header = (
            f"WCCOV1 mode={self.mode} n={n} N={self.N} "
            f"r={self.r!r} R={self.R!r}\n"
        ).encode()
        rows = np.array(
            [
                [float(c.j), c.t, *c.x, c.psi_value, *c.z, c.T, c.gamma,
                 1.0 if c.recentered else 0.0]
                for c in self.centers
            ],
            dtype="<f8",
        )
        return header + rows.tobytes()


@dataclass(frozen=True)
class CoveringReport:
    """Post-hoc invariant audit of a covering."""

    n_centers: int
    min_separation: float       # min pairwise distance (mode metric)
    separation_ok: bool
    uncovered_nodes: int
    coverage_ok: bool
    psi_monotone_ok: bool
    count_bound: float          # c170 / J0 bound when supplied, else inf
    count_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.separation_ok and self.coverage_ok and self.psi_monotone_ok and self.count_ok


# ---------------------------------------------------------------------------
# lattice helpers
# ---------------------------------------------------------------------------


def _axis_window(ax: np.ndarray, lo: float, hi: float) -> tuple[int, int]:
    """Index slice [i0, i1) of nodes with lo <= ax <= hi."""
    i0 = int(np.searchsorted(ax, lo, side="left"))
    i1 = int(np.searchsorted(ax, hi, side="right"))
    return i0, i1


def _window_mask(
    all_axes: Sequence[np.ndarray],
    y: np.ndarray,
    radius: float,
    mode: str,
) -> tuple[tuple[slice, ...], np.ndarray]:
    """Boolean membership of the neighborhood of y on its index window.

    Ball mode: Euclidean space-time ball of ``radius``; cylinder mode:
    |t - t_c| <= radius and Euclidean space ball of ``radius``.
    """
    bounds = [_axis_window(ax, y[k] - radius, y[k] + radius) for k, ax in enumerate(all_axes)]
    slices = tuple(slice(i0, i1) for i0, i1 in bounds)
    locals_ = [all_axes[k][slices[k]] - y[k] for k in range(len(all_axes))]
    mesh = np.meshgrid(*locals_, indexing="ij") if locals_ else []
    if mode == "ball":
        d2 = sum(m * m for m in mesh)
        member = d2 <= radius * radius
    else:
        d2_space = sum(m * m for m in mesh[1:])
        member = (np.abs(mesh[0]) <= radius) & (d2_space <= radius * radius)
    return slices, member


def measure_volume(mask: np.ndarray, times: np.ndarray, axes: Sequence[np.ndarray]) -> float:
    """Node-count volume of a space-time mask (cells centered on nodes)."""
    cell = float(times[1] - times[0]) if len(times) > 1 else 1.0
    for ax in axes:
        cell *= float(ax[1] - ax[0]) if len(ax) > 1 else 1.0
    return float(np.count_nonzero(mask)) * cell


def ball_count_bound(vol_omega0: float, r: float, b1: float, n: int) -> float:
    """Volume-quotient center count bound for ball coverings (c170)."""
    d = n + 1
    omega_d = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    return vol_omega0 / (omega_d * (r / (4.0 * math.sqrt(max(b1, 1.0)))) ** d)


def cylinder_count_bound(n: int, T: float, a1: float, r: float) -> float:
    """Volume-quotient step bound for cylinder coverings (J0)."""
    rho0 = 2.0 * (T + 1.0) / math.sqrt(a1)
    return (4.0 * (rho0 + r) / r) ** (n + 1)


def influence_radius_cap(i0: float, ell: float, gamma: float, T: float, b0: float) -> float:
    """Largest admissible large radius for the influence covering.

    R0 = (2 sqrt(b0))^{-1} min{i0/4, 3 ell/4, gamma^2 / (8 (T - ell))}.
    """
    return min(i0 / 4.0, 3.0 * ell / 4.0, gamma**2 / (8.0 * (T - ell))) / (2.0 * math.sqrt(b0))


# ---------------------------------------------------------------------------
# the greedy argmax loop
# ---------------------------------------------------------------------------


class _GreedyState:
    """Sorted-order argmax with lazy deletion and windowed removal."""

    def __init__(
        self,
        target: np.ndarray,
        psi_grid: np.ndarray,
        all_axes: Sequence[np.ndarray],
        excl_radius: float,
        mode: str,
    ):
        self.shape = target.shape
        self.all_axes = all_axes
        self.excl = excl_radius
        self.mode = mode
        self.removed = ~np.ascontiguousarray(target, dtype=bool)
        # the r/2-neighborhoods alone (no target complement): the kill zone
        # of the multiplier masks m_j, needed by support-condition audits
        self.balls = np.zeros(self.shape, dtype=bool)

        flat_target = np.nonzero(target.ravel())[0]
        if flat_target.size == 0:
            raise EmptyRegion("covering target contains no grid nodes")
        vals = psi_grid.ravel()[flat_target]
        self.tie_tol = _TIE_REL * float(np.max(np.abs(vals)))
        # order: psi descending, then flat node index ascending
        order = np.lexsort((flat_target, -vals))
        self.order_idx = flat_target[order]
        self.order_val = vals[order]
        self.pos = 0
        self.removed_flat = self.removed.ravel()  # view

    def pick(self) -> Optional[tuple[int, float]]:
        """Next center node per the argmax-with-ties rule, or None when done."""
        n = self.order_idx.size
        while self.pos < n and self.removed_flat[self.order_idx[self.pos]]:
            self.pos += 1
        if self.pos >= n:
            return None
        m = self.order_val[self.pos]
        # candidates: positions with psi >= m - tie_tol (a contiguous block)
        hi = bisect_left(self.order_val, -(m - self.tie_tol), lo=self.pos, key=lambda v: -v)
        best_pos = self.pos
        if hi > self.pos + 1:
            block = self.order_idx[self.pos:hi]
            alive = ~self.removed_flat[block]
            if not alive.any():  # pragma: no cover - pos already alive
                return None
            best_local = int(np.argmin(np.where(alive, block, np.iinfo(np.int64).max)))
            best_pos = self.pos + best_local
        flat = int(self.order_idx[best_pos])
        return flat, float(self.order_val[best_pos])

    def node_coords(self, flat: int) -> np.ndarray:
        idx = np.unravel_index(flat, self.shape)
        return np.array([self.all_axes[k][idx[k]] for k in range(len(self.all_axes))])

    def remove_around(self, y: np.ndarray) -> None:
        slices, member = _window_mask(self.all_axes, y, self.excl, self.mode)
        self.removed[slices] |= member
        self.balls[slices] |= member

    def done(self) -> bool:
        n = self.order_idx.size
        while self.pos < n and self.removed_flat[self.order_idx[self.pos]]:
            self.pos += 1
        return self.pos >= n


def _check_escape(
    omega0: np.ndarray,
    all_axes: Sequence[np.ndarray],
    y: np.ndarray,
    radius: float,
    mode: str,
    j: int,
) -> None:
    slices, member = _window_mask(all_axes, y, radius, mode)
    ok = omega0[slices] | ~member
    if not ok.all():
        bad = np.argwhere(~ok)[0]
        node = [all_axes[k][slices[k].start + bad[k]] for k in range(len(all_axes))]
        raise TargetEscapesOmega0(
            f"center {j} at y = {np.array2string(y, precision=4)}: node "
            f"{np.array2string(np.array(node), precision=4)} of its {radius:.4g}-"
            "neighborhood lies outside Omega_0"
        )


def greedy_cover(
    target: np.ndarray,
    psi: Union[HyperbolicFunction, np.ndarray],
    times: np.ndarray,
    axes: Sequence[np.ndarray],
    r: float,
    R: float,
    omega0: Optional[np.ndarray] = None,
    mode: str = "ball",
) -> Covering:
    """Greedy argmax covering of a node set by r/2-separated centers.

    ``target`` is a boolean node mask of shape (len(times), *space shape);
    ``psi`` either a :class:`HyperbolicFunction` evaluated on that lattice or
    a precomputed scalar grid of the same shape.  When ``omega0`` is given,
    every center's 2R-neighborhood is required to stay inside it
    (:class:`TargetEscapesOmega0` otherwise).
    """
    if mode not in ("ball", "cylinder"):
        raise ParameterOrder(f"mode must be 'ball' or 'cylinder', got {mode!r}")
    if r <= 0.0 or R <= 0.0:
        raise NonPositiveInput("covering radii must be > 0")
    if r > R:
        raise ParameterOrder(f"r = {r} must not exceed R = {R}")
    times = np.asarray(times, dtype=float)
    all_axes = [times, *[np.asarray(ax, dtype=float) for ax in axes]]

    if isinstance(psi, HyperbolicFunction):
        psi_grid = psi.value_nodes(times)
        z0, T0 = psi.z, psi.T
    else:
        psi_grid = np.asarray(psi, dtype=float)
        z0 = np.full(len(axes), math.nan)
        T0 = math.nan
    if psi_grid.shape != target.shape:
        raise ParameterOrder("psi grid and target mask shapes disagree")

    state = _GreedyState(target, psi_grid, all_axes, r / 2.0, mode)
    centers: list[CoveringCenter] = []
    while True:
        picked = state.pick()
        if picked is None:
            break
        flat, val = picked
        y = state.node_coords(flat)
        j = len(centers) + 1
        if omega0 is not None:
            _check_escape(omega0, all_axes, y, 2.0 * R, mode, j)
        centers.append(
            CoveringCenter(
                j=j,
                t=float(y[0]),
                x=y[1:].copy(),
                psi_value=val,
                z=z0.copy(),
                T=T0,
                gamma=math.sqrt(val) if val >= 0.0 else math.nan,
                recentered=False,
            )
        )
        state.remove_around(y)

    cov = Covering(
        mode=mode,
        r=r,
        R=R,
        centers=tuple(centers),
        psi_min_attained=centers[-1].psi_value,
        r_requested=r,
        R_requested=R,
    )
    rep = covering_report(cov, target, times, axes)
    if not (rep.separation_ok and rep.coverage_ok and rep.psi_monotone_ok):
        raise GeometryViolated(f"covering invariants failed post-hoc: {rep}")
    return cov


def covering_report(
    cov: Covering,
    target: np.ndarray,
    times: np.ndarray,
    axes: Sequence[np.ndarray],
    count_bound: float = math.inf,
) -> CoveringReport:
    """Audit separation, coverage, psi monotonicity, and the count bound.

    Coverage radius is r in ball mode and r/2 in cylinder mode, matching the
    covering-set definition of each mode.
    """
    from scipy.spatial import cKDTree

    times = np.asarray(times, dtype=float)
    all_axes = [times, *[np.asarray(ax, dtype=float) for ax in axes]]
    pts = cov.center_array()

    # separation in the mode metric
    min_sep = math.inf
    if cov.N > 1:
        tree = cKDTree(pts)
        if cov.mode == "ball":
            dists, _ = tree.query(pts, k=2)
            min_sep = float(np.min(dists[:, 1]))
        else:
            # product metric max(|dt|, |dx|): candidate pairs via the Euclidean
            # superset d_E <= sqrt(2) d_prod, then exact evaluation
            cand = tree.query_pairs(cov.r / 2.0 * math.sqrt(2.0) * (1.0 + 1e-12))
            min_sep = math.inf
            for a, b in cand:
                dt = abs(pts[a, 0] - pts[b, 0])
                dx = float(np.linalg.norm(pts[a, 1:] - pts[b, 1:]))
                min_sep = min(min_sep, max(dt, dx))
    sep_ok = bool(cov.N <= 1 or min_sep >= cov.r / 2.0 * (1.0 - 1e-12))

    # coverage by windowed marking
    cover_radius = cov.r if cov.mode == "ball" else cov.r / 2.0
    covered = np.zeros(target.shape, dtype=bool)
    for c in cov.centers:
        slices, member = _window_mask(all_axes, c.y, cover_radius, cov.mode)
        covered[slices] |= member
    uncovered = int(np.count_nonzero(target & ~covered))

    vals = [c.psi_value for c in cov.centers]
    tie = _TIE_REL * max(abs(v) for v in vals)
    mono = all(vals[i + 1] <= vals[i] + tie for i in range(len(vals) - 1))

    return CoveringReport(
        n_centers=cov.N,
        min_separation=min_sep,
        separation_ok=sep_ok,
        uncovered_nodes=uncovered,
        coverage_ok=uncovered == 0,
        psi_monotone_ok=mono,
        count_bound=count_bound,
        count_ok=cov.N <= count_bound,
    )


# ---------------------------------------------------------------------------
# influence covering with recentering and support checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupportReport:
    """Aggregate of the per-step support-condition verification."""

    checked_nodes: int
    violations: int
    worst_excess: float         # most positive psi excess beyond the slack
    slack: float
    per_center: tuple[tuple[int, int], ...]  # (j, violation count) when > 0

    @property
    def ok(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class InfluenceCovering:
    """Covering of Lambda-bar with recentered certificates and audits."""

    covering: Covering
    sets: InfluenceSets
    support: SupportReport
    r0_cap: float
    max_psi_discrepancy: float
    psi_discrepancy_tol: float
    recentered_count: int


def influence_cover(
    geo_z0: GeodesicField,
    times: np.ndarray,
    T: float,
    ell: float,
    gamma: float,
    r: float,
    R: float,
    *,
    alpha: float = 0.5,
    check_support: bool = True,
    enforce_small_cylinder: bool = True,
) -> InfluenceCovering:
    """Cover Lambda-bar greedily and certify each center's local data.

    For every selected y_j the result stores (z_j, T_j, gamma_j): the
    original center when d_g(z0, x_j) <= 7 i0/8, else the recentered pair
    from :func:`~wavecert.domains.recenter`.  Each step verifies, on lattice
    nodes, the support condition

        supp(m_j u) cap C(y_j, 2R)  subset  {psi_{z_j, T_j} <= psi_{z_j, T_j}(y_j)}

    with supp(m_j u) read as the cylinder nodes outside W (where u vanishes
    by assumption) and outside the first j-1 exclusion balls (where the mask
    product vanishes), plus the psi hand-off equality
    |psi(y_j; T_j, z_j) - psi(y_j; T, z0)| within twice the combined marching
    tolerance.  The requested radii are capped by R0
    (:func:`influence_radius_cap`); effective values are recorded on the
    returned covering.
    """
    field = geo_z0.metric
    sets = influence_sets(
        geo_z0, times, ell, T, gamma, enforce_small_cylinder=enforce_small_cylinder
    )
    r0 = influence_radius_cap(field.i0, ell, gamma, T, field.b0)
    R_eff = min(R, r0)
    r_eff = min(r, R_eff)

    times = np.asarray(times, dtype=float)
    all_axes = [times, *[np.asarray(ax, dtype=float) for ax in field.axes]]
    psi_grid = sets.psi
    target = sets.lam
    if not target.any():
        raise EmptyRegion("Lambda contains no grid nodes on this lattice")

    state = _GreedyState(target, psi_grid, all_axes, r_eff / 2.0, "ball")
    i0 = field.i0
    abs_t2 = (times**2).reshape((-1,) + (1,) * field.n)

    geo_cache: dict = {geo_z0.z_idx: geo_z0}
    centers: list[CoveringCenter] = []
    checked = 0
    violations: list[tuple[int, int]] = []
    worst_excess = -math.inf
    max_disc = 0.0
    disc_tol = 0.0
    recentered_count = 0

    while True:
        picked = state.pick()
        if picked is None:
            break
        flat, val = picked
        y = state.node_coords(flat)
        space_idx = np.unravel_index(flat, state.shape)[1:]
        d_origin = float(geo_z0.d[space_idx])
        j = len(centers) + 1

        if d_origin <= 7.0 * i0 / 8.0 + geo_z0.tol:
            z_j, T_j = geo_z0.z.copy(), T
            geo_j = geo_z0
            was_recentered = False
            disc = 0.0
        else:
            rr = recenter(geo_z0, T, y[1:], ell, gamma, geo_cache=geo_cache)
            z_j, T_j = rr.z_hat, rr.T_hat
            geo_j = rr.psi_hat.geo
            was_recentered = rr.case == "b"
            recentered_count += 1 if was_recentered else 0
            psi_back = (T_j - float(geo_j.d[space_idx])) ** 2 - y[0] ** 2
            disc = abs(psi_back - val)
        tol_here = 2.0 * (geo_z0.tol + geo_j.tol) * max(1.0, T)
        disc_tol = max(disc_tol, tol_here)
        if disc > tol_here:
            raise GeometryViolated(
                f"center {j}: recentered psi hand-off differs by {disc:.3e} "
                f"(tolerance {tol_here:.3e})"
            )
        max_disc = max(max_disc, disc)

        gamma_j = math.sqrt(val)
        if gamma_j < gamma * (1.0 - 1e-12):
            raise GeometryViolated(
                f"center {j}: gamma_j = {gamma_j:.6g} fell below gamma = {gamma}"
            )

        if check_support:
            slices, member = _window_mask(all_axes, y, 2.0 * R_eff, "cylinder")
            # supp(m_j u): u vanishes on the inner cylinder W by assumption
            # and on every earlier r/2-ball through the mask product; nodes
            # of small psi pass the sublevel comparison automatically
            alive = member & ~sets.w_set[slices] & ~state.balls[slices]
            checked += int(np.count_nonzero(alive))
            psi_j_window = (T_j - geo_j.d[slices[1:]][None, ...]) ** 2 - abs_t2[slices[0]]
            psi_j_center = (T_j - float(geo_j.d[space_idx])) ** 2 - y[0] ** 2
            slack = 2.0 * geo_j.tol * max(1.0, T_j) + 1e-9
            excess = np.where(alive, psi_j_window - psi_j_center - slack, -math.inf)
            n_bad = int(np.count_nonzero(excess > 0.0))
            if excess.size:
                worst_excess = max(worst_excess, float(np.max(excess)))
            if n_bad:
                violations.append((j, n_bad))

        centers.append(
            CoveringCenter(
                j=j,
                t=float(y[0]),
                x=y[1:].copy(),
                psi_value=val,
                z=np.asarray(z_j, dtype=float),
                T=T_j,
                gamma=gamma_j,
                recentered=was_recentered,
                d_origin=d_origin,
                psi_discrepancy=disc,
            )
        )
        state.remove_around(y)

    cov = Covering(
        mode="ball",
        r=r_eff,
        R=R_eff,
        centers=tuple(centers),
        psi_min_attained=centers[-1].psi_value,
        r_requested=r,
        R_requested=R,
    )
    support = SupportReport(
        checked_nodes=checked,
        violations=sum(v for _, v in violations),
        worst_excess=worst_excess,
        slack=2.0 * geo_z0.tol * max(1.0, T) + 1e-9,
        per_center=tuple(violations),
    )
    if check_support and not support.ok:
        raise SupportConditionViolated(
            f"{support.violations} node(s) across centers "
            f"{[j for j, _ in violations]} exceed their certified sublevel set "
            f"(worst excess {support.worst_excess:.3e})"
        )
    return InfluenceCovering(
        covering=cov,
        sets=sets,
        support=support,
        r0_cap=r0,
        max_psi_discrepancy=max_disc,
        psi_discrepancy_tol=disc_tol,
        recentered_count=recentered_count,
    )


# ---------------------------------------------------------------------------
# cut-off masks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutMaskSequence:
    """Multiplier grids m_j = prod_{k<j} (1 - b_k) over the lattice.

    ``b_stack[k]`` samples b(2 |y - y_{k+1}| / r); masks are materialized on
    demand (``mask``) or incrementally (``masks``).
    """

    b_stack: np.ndarray          # (N, len(times), *space)
    r: float

    @property
    def N(self) -> int:
        return self.b_stack.shape[0]

    def mask(self, j: int) -> np.ndarray:
        """m_j for 1 <= j <= N + 1 (m_1 is identically one)."""
        if not 1 <= j <= self.N + 1:
            raise ParameterOrder(f"mask index {j} outside 1..{self.N + 1}")
        out = np.ones(self.b_stack.shape[1:], dtype=float)
        for k in range(j - 1):
            out *= 1.0 - self.b_stack[k]
        return out

    def masks(self) -> Iterator[np.ndarray]:
        """m_1, m_2, ..., m_{N+1} with incremental products."""
        out = np.ones(self.b_stack.shape[1:], dtype=float)
        yield out.copy()
        for k in range(self.N):
            out = out * (1.0 - self.b_stack[k])
            yield out.copy()


def cut_masks(
    cov: Covering,
    times: np.ndarray,
    axes: Sequence[np.ndarray],
    alpha: float = 0.5,
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> CutMaskSequence:
    """Sample the localizer stack b_k = b(2 (y - y_k) / r) on the lattice.

    ``profile`` is a radial plateau shape (1 on [0, 1], 0 beyond 2); the
    canonical Gevrey bump at index ``alpha`` by default.
    """
    prof = (lambda s: bump(s, alpha)) if profile is None else profile
    times = np.asarray(times, dtype=float)
    mesh = np.meshgrid(times, *[np.asarray(ax, dtype=float) for ax in axes], indexing="ij")
    stack = np.empty((cov.N,) + mesh[0].shape, dtype=float)
    for k, c in enumerate(cov.centers):
        d2 = sum((m - yc) ** 2 for m, yc in zip(mesh, c.y))
        stack[k] = prof(2.0 * np.sqrt(d2) / cov.r)
    return CutMaskSequence(b_stack=stack, r=cov.r)


def check_cut_masks(seq: CutMaskSequence, cov: Covering, times: np.ndarray,
                    axes: Sequence[np.ndarray]) -> bool:
    """Node-wise invariants: range, kill zone, and locality of updates."""
    times = np.asarray(times, dtype=float)
    all_axes = [times, *[np.asarray(ax, dtype=float) for ax in axes]]
    prev: Optional[np.ndarray] = None
    for j, m in enumerate(seq.masks(), start=1):
        if not ((m >= 0.0) & (m <= 1.0)).all():
            return False
        if j == 1:
            if not (m == 1.0).all():
                return False
        else:
            c = cov.centers[j - 2]
            slices, member = _window_mask(all_axes, c.y, cov.r / 2.0, "ball")
            if not (m[slices][member] == 0.0).all():
                return False
            outside = np.ones(m.shape, dtype=bool)
            sl_r, mem_r = _window_mask(all_axes, c.y, cov.r, "ball")
            outside[sl_r] &= ~mem_r
            if not (m[outside] == prev[outside]).all():
                return False
        prev = m
    return True


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_covering_csv(cov: Covering, path: str) -> None:
    """Write the center table as CSV with the published column layout."""
    n = cov.n_space
    cols = (
        ["j", "t_j"]
        + [f"x{k+1}_j" for k in range(n)]
        + ["psi_value"]
        + [f"z{k+1}_j" for k in range(n)]
        + ["T_j", "gamma_j", "recentered_flag"]
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for c in cov.centers:
            w.writerow(
                [c.j, repr(c.t)]
                + [repr(float(v)) for v in c.x]
                + [repr(c.psi_value)]
                + [repr(float(v)) for v in c.z]
                + [repr(c.T), repr(c.gamma), int(c.recentered)]
            )
