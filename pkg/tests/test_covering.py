"""Greedy coverings: determinism, replay fidelity, audits, influence wrapper."""

import math

import numpy as np
import pytest

from wavecert.covering import (
    Covering,
    CoveringCenter,
    ball_count_bound,
    check_cut_masks,
    covering_report,
    cut_masks,
    cylinder_count_bound,
    export_covering_csv,
    greedy_cover,
    influence_cover,
    influence_radius_cap,
    measure_volume,
)
from wavecert.errors import (
    EmptyRegion,
    NonPositiveInput,
    ParameterOrder,
    TargetEscapesOmega0,
)

ELL, T, GAMMA = 0.1, 0.5, 0.15


def _toy_grid(nt=20, nx=20, ny=20):
    times = np.linspace(-1.0, 1.0, nt)
    ax = np.linspace(-1.0, 1.0, nx)
    ay = np.linspace(-1.0, 1.0, ny)
    tt, xx, yy = np.meshgrid(times, ax, ay, indexing="ij")
    psi = 0.8 - (xx**2 + 0.7 * yy**2 + 0.5 * tt**2) + 0.05 * np.sin(5 * xx + 3 * yy)
    target = psi > 0.1
    return times, (ax, ay), psi, target


def _naive_replay(target, psi_grid, times, axes, r):
    """Independent O(N*M) reimplementation of the argmax-with-ties greedy rule."""
    all_axes = [np.asarray(times, float), *[np.asarray(a, float) for a in axes]]
    shape = target.shape
    flat_all = np.arange(target.size)
    coords = np.column_stack(
        [all_axes[k][np.unravel_index(flat_all, shape)[k]] for k in range(len(all_axes))]
    )
    vals = psi_grid.ravel()
    alive = target.ravel().copy()
    tie = 1e-12 * float(np.max(np.abs(vals[alive])))
    out = []
    while alive.any():
        m = float(np.max(vals[alive]))
        cand = alive & (vals >= m - tie)
        flat = int(np.min(flat_all[cand]))  # smallest flat index among ties
        y = coords[flat]
        out.append((y, float(vals[flat])))
        dist2 = np.sum((coords - y) ** 2, axis=1)
        alive &= ~(dist2 <= (r / 2.0) ** 2)
    return out


def test_greedy_cover_matches_naive_replay_byte_identical():
    times, axes, psi, target = _toy_grid()
    r, R = 0.35, 0.5
    cov = greedy_cover(target, psi, times, axes, r, R)
    replay = _naive_replay(target, psi, times, axes, r)
    assert len(cov.centers) == len(replay)
    centers = tuple(
        CoveringCenter(
            j=j + 1,
            t=float(y[0]),
            x=y[1:].copy(),
            psi_value=val,
            z=np.full(2, math.nan),
            T=math.nan,
            gamma=math.sqrt(val) if val >= 0.0 else math.nan,
            recentered=False,
        )
        for j, (y, val) in enumerate(replay)
    )
    twin = Covering(
        mode="ball",
        r=r,
        R=R,
        centers=centers,
        psi_min_attained=centers[-1].psi_value,
        r_requested=r,
        R_requested=R,
    )
    assert cov.serialize() == twin.serialize()


def test_greedy_cover_deterministic_bytes():
    times, axes, psi, target = _toy_grid()
    a = greedy_cover(target, psi, times, axes, 0.3, 0.45)
    b = greedy_cover(target, psi, times, axes, 0.3, 0.45)
    assert a.serialize() == b.serialize()


def test_covering_separation_and_coverage():
    times, axes, psi, target = _toy_grid()
    r, R = 0.3, 0.45
    cov = greedy_cover(target, psi, times, axes, r, R)
    rep = covering_report(cov, target, times, axes)
    assert rep.separation_ok
    assert rep.min_separation >= r / 2.0
    assert rep.coverage_ok
    assert rep.uncovered_nodes == 0
    assert rep.psi_monotone_ok
    # psi values decrease along the pick order
    vals = [c.psi_value for c in cov.centers]
    assert all(vals[i] >= vals[i + 1] - 1e-12 for i in range(len(vals) - 1))


def test_covering_count_bound_audit():
    times, axes, psi, target = _toy_grid()
    r, R = 0.3, 0.45
    cov = greedy_cover(target, psi, times, axes, r, R)
    vol = measure_volume(target, times, axes)
    bound = ball_count_bound(vol, r, 1.0, 2)
    rep = covering_report(cov, target, times, axes, count_bound=bound)
    assert rep.count_bound == bound
    assert rep.count_ok
    assert rep.n_centers <= bound


def test_greedy_cover_parameter_validation():
    times, axes, psi, target = _toy_grid(8, 8, 8)
    with pytest.raises(ParameterOrder):
        greedy_cover(target, psi, times, axes, 0.5, 0.3)  # r > R
    with pytest.raises(NonPositiveInput):
        greedy_cover(target, psi, times, axes, -0.1, 0.3)
    with pytest.raises(ParameterOrder):
        greedy_cover(target, psi, times, axes, 0.2, 0.3, mode="tube")
    with pytest.raises(EmptyRegion):
        greedy_cover(np.zeros_like(target), psi, times, axes, 0.2, 0.3)


def test_greedy_cover_escape_guard():
    times, axes, psi, target = _toy_grid()
    # omega0 equal to the target itself: 2R-neighborhoods must poke out
    with pytest.raises(TargetEscapesOmega0):
        greedy_cover(target, psi, times, axes, 0.3, 0.45, omega0=target)
    # a permissive omega0 passes
    cov = greedy_cover(target, psi, times, axes, 0.3, 0.45, omega0=np.ones_like(target))
    assert len(cov.centers) > 0


def test_cylinder_mode_separation_metric():
    times, axes, psi, target = _toy_grid()
    cov = greedy_cover(target, psi, times, axes, 0.3, 0.45, mode="cylinder")
    rep = covering_report(cov, target, times, axes)
    assert rep.separation_ok and rep.coverage_ok
    assert cov.mode == "cylinder"


def test_count_bound_formulas():
    # ball bound: halving r multiplies the bound by 2^(n+1)
    b1 = ball_count_bound(1.0, 0.2, 1.0, 2)
    b2 = ball_count_bound(1.0, 0.1, 1.0, 2)
    assert b2 == pytest.approx(8.0 * b1, rel=1e-12)
    assert ball_count_bound(2.0, 0.2, 1.0, 2) == pytest.approx(2.0 * b1, rel=1e-12)
    # cylinder bound grows as r shrinks
    assert cylinder_count_bound(2, 0.5, 1.0, 0.05) > cylinder_count_bound(2, 0.5, 1.0, 0.1)


def test_influence_radius_cap_formula():
    cap = influence_radius_cap(0.9, ELL, GAMMA, T, 1.01)
    want = min(0.9 / 4.0, 3.0 * ELL / 4.0, GAMMA**2 / (8.0 * (T - ELL))) / (
        2.0 * math.sqrt(1.01)
    )
    assert cap == pytest.approx(want, rel=1e-15)


def test_influence_cover_end_to_end(ident_geo_129):
    times = np.linspace(-T, T, 65)
    out = influence_cover(ident_geo_129, times, T, ELL, GAMMA, r=0.2, R=0.6)
    cov = out.covering
    # requested radii are capped at the admissible influence radius
    cap = influence_radius_cap(0.9, ELL, GAMMA, T, ident_geo_129.metric.b0)
    assert out.r0_cap == pytest.approx(cap, rel=1e-12)
    assert cov.R <= cap + 1e-15
    assert cov.r <= cov.R
    assert cov.r_requested == 0.2 and cov.R_requested == 0.6
    assert len(cov.centers) > 0
    # support condition: every center's localizer support stays inside omega0
    assert out.support is not None
    assert out.support.violations == 0
    assert out.support.checked_nodes > 0
    # recentering hand-off error within the marching tolerance budget
    assert out.max_psi_discrepancy <= out.psi_discrepancy_tol
    rep = covering_report(cov, out.sets.lam, times, ident_geo_129.metric.axes)
    assert rep.separation_ok and rep.coverage_ok and rep.psi_monotone_ok


def test_cut_masks_roundtrip():
    # small synthetic covering: the mask stack is dense per center
    times, axes, psi, target = _toy_grid(12, 12, 12)
    cov = greedy_cover(target, psi, times, axes, 0.6, 0.8)
    seq = cut_masks(cov, times, axes, alpha=0.5)
    assert seq.b_stack.shape == (len(cov.centers), 12, 12, 12)
    assert np.all(seq.b_stack >= 0.0) and np.all(seq.b_stack <= 1.0)
    assert check_cut_masks(seq, cov, times, axes)


def test_export_covering_csv(tmp_path, ident_geo_129):
    times = np.linspace(-T, T, 33)
    out = influence_cover(ident_geo_129, times, T, ELL, GAMMA, r=0.2, R=0.6, check_support=False)
    path = tmp_path / "cov.csv"
    export_covering_csv(out.covering, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("j,")
    assert len(lines) == len(out.covering.centers) + 1


def test_measure_volume_counts_cells():
    times = np.linspace(0.0, 1.0, 11)
    ax = np.linspace(0.0, 1.0, 11)
    mask = np.ones((11, 11), dtype=bool)
    # 121 nodes x cell volume 0.01
    assert measure_volume(mask, times, (ax,)) == pytest.approx(1.21, rel=1e-12)
