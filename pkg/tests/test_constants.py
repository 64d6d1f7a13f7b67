"""Constants pipeline vs the independent row-by-row transcription."""

import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
import table_transcription as oracle  # noqa: E402

from wavecert.constants import (  # noqa: E402
    CertificateConstants,
    CompanionInputs,
    LocalizerProfile,
    OperatorBounds,
    PsiData,
    build_certificate_constants,
    c120_unified,
    c159_log,
    carleman_constants,
    commutator_filter_constants,
    gevrey_filter_constants,
    gevrey_rescaled,
    localizer_profile_from_bump,
    pseudoconvexity_constants,
    radii_constants,
    unit_ball_volume,
    wide_filter_constants,
)
from wavecert.errors import (  # noqa: E402
    AlphaOutOfRange,
    BetaTooSmall,
    DivergentConstant,
    NonPositiveInput,
    Overflow,
    ParameterOrder,
)
from wavecert.gevrey import measure_bump  # noqa: E402
from wavecert.logspace import LogScalar  # noqa: E402

# Reference fixture: weight x1 - t/2 on the flat metric.
#   sup |psi'| = |(-1/2, 1, 0)| = sqrt(5)/2, all higher derivatives vanish,
#   principal symbol on psi' = |grad_x psi|^2 - (dt psi)^2 = 1 - 1/4 = 3/4.
S5H = math.sqrt(5.0) / 2.0
FIX = {
    "n": 2,
    "a0": 0.99,
    "b0": 1.01,
    "a1": 1.0 / 1.01,
    "b1": 1.0 / 0.99,
    "psi1": S5H,
    "psi2": 0.0,
    "psi3": 0.0,
    "psi2_hoelder": 0.0,
    "Cl": S5H,
    "p1": 0.75,
    "dist": 0.25,
    "g_c0": 1.0,
    "g_c1": 1.0,
    "h_c0": 0.0,
    "q_c0": 0.0,
    "rho": 1.0,
    "chi1_d1": 2.5,
    "chi1_d2": 12.0,
}

OP = OperatorBounds(
    n=2,
    a1=FIX["a1"],
    b1=FIX["b1"],
    g_c0=1.0,
    g_c1=1.0,
    h_c0=0.0,
    q_c0=0.0,
)
PSI = PsiData(
    n=2,
    psi_d1=S5H,
    psi_d2=0.0,
    cl=S5H,
    p1=0.75,
    psi_min=0.01,
    psi_max=0.25,
    dist=0.25,
    vol=1.0,
)
LOC = LocalizerProfile(
    alpha=0.5,
    c1_b=1.3,
    c1_bp=2.1,
    c1_bpp=6.4,
    b_d1=1.1,
    b_d2=4.2,
    chi1_d1=FIX["chi1_d1"],
    chi1_d2=FIX["chi1_d2"],
    a_sup=1.0,
)


def _pipeline_rows() -> dict:
    rows = dict(pseudoconvexity_constants(OP, PSI))
    rows.update(radii_constants(rows, OP, PSI))
    rows.update(carleman_constants(rows, OP, LOC, PSI))
    return rows


def test_every_table_row_matches_transcription():
    want = oracle.transcribe(FIX)
    got = _pipeline_rows()
    for name, ref in want.items():
        assert name in got, f"pipeline is missing table row {name}"
        assert got[name] == pytest.approx(ref, rel=1e-12), (
            f"row {name}: pipeline {got[name]!r} vs transcription {ref!r}"
        )


def test_exact_rows():
    got = _pipeline_rows()
    assert got["MP"] == 1.0
    assert got["phi0"] == math.exp(-1.0)
    assert got["phiM"] == math.e


def test_rows_via_certificate_records():
    cert = build_certificate_constants(OP, PSI, LOC, n_balls=3, alpha=0.5)
    want = oracle.transcribe(FIX)
    for name, ref in want.items():
        assert cert[name] == pytest.approx(ref, rel=1e-12)
    assert isinstance(cert, CertificateConstants)
    assert cert.mode == "alpha-first"
    assert cert.theta == pytest.approx(0.5**3, rel=1e-15)


def test_record_metadata_complete():
    cert = build_certificate_constants(OP, PSI, LOC, n_balls=3, alpha=0.5)
    names = [rec.name for rec in cert.records]
    assert len(names) == len(set(names)), "duplicate record names"
    for rec in cert.records:
        assert rec.direction in ("<=", ">=", "=")
        assert rec.formula_id
        assert isinstance(rec.inputs, tuple)
        assert math.isfinite(rec.ln_value), f"{rec.name} has non-finite log"
        if rec.value is not None and rec.value > 0.0 and math.isfinite(rec.value):
            assert rec.ln_value == pytest.approx(math.log(rec.value), abs=1e-9)


def test_theta_first_matches_alpha_first():
    a = 0.66
    cert_a = build_certificate_constants(OP, PSI, LOC, n_balls=4, alpha=a)
    cert_t = build_certificate_constants(OP, PSI, LOC, n_balls=4, theta=a**4)
    assert cert_t.mode == "theta-first"
    assert cert_t.alpha == pytest.approx(a, rel=1e-12)
    for rec in cert_a.records:
        assert cert_t.ln(rec.name) == pytest.approx(rec.ln_value, rel=1e-9, abs=1e-9)


def test_gevrey_filter_constants_match_oracle():
    g = gevrey_filter_constants(LOC, beta1=4.0, support_vol=2.0)
    ref = oracle.filter_constants(LOC.alpha, float(g["c3"]), 4.0)
    assert float(g["c3"]) == pytest.approx(LOC.c1_b * 2.0, rel=1e-15)
    for key in ("c117", "c106", "c107"):
        assert float(g[key]) == pytest.approx(ref[key], rel=1e-12), key


def test_commutator_filter_constants_match_oracle():
    comm = commutator_filter_constants(LOC, r=0.3, n=2)
    c3 = float(comm["c3"])
    assert math.isfinite(c3) and c3 > 0.0
    # support volume of the radius-r ball in R^{n+1}
    vol = unit_ball_volume(3) * 0.3**3
    assert c3 == pytest.approx(float(comm["c_comm"]) * vol, rel=1e-12)
    ref = oracle.commutator_c106(LOC.alpha, c3)
    assert float(comm["c106"]) == pytest.approx(ref, rel=1e-12)
    # plain localizer decay rate at the same prefactor
    assert float(comm["c117"]) == pytest.approx(1.0 / (math.e * c3) ** LOC.alpha, rel=1e-12)
    assert comm["c108"] == comm["c107"]


def test_wide_filter_constants_match_oracle():
    wide = wide_filter_constants(LOC, big_r=0.4, n=2)
    c3t = float(wide["c3t"])
    ref_beta = oracle.beta_from_c3_tilde(LOC.alpha, c3t)
    assert wide["beta"] == pytest.approx(ref_beta, rel=1e-12)
    # the defining property of beta: the filtered product collapses to beta^-alpha
    assert wide["c106t"].ln == pytest.approx(-LOC.alpha * math.log(wide["beta"]), rel=1e-12)


def test_wide_filter_collapse_identity_at_certificate_scale():
    # at tiny decay rates the excess underflows but the log-space product
    # still equals beta^-alpha: beta = 2 + excess with huge excess means
    # c106t -> excess^-alpha asymptotically; check finite small scale too
    wide = wide_filter_constants(LOC, big_r=1e-30, n=2)
    assert wide["c106t"].ln == pytest.approx(-LOC.alpha * math.log(wide["beta"]), rel=1e-9)


def test_c159_log_matches_oracle_desk_scale():
    for c156, alpha, n_balls in ((0.5, 0.5, 3), (0.25, 0.66, 5), (0.9, 0.3, 2)):
        ref = oracle.c159(c156, alpha, n_balls)
        got = c159_log(c156, alpha, n_balls)
        assert got.ln == pytest.approx(math.log(ref), rel=1e-12)


def test_c159_log_validation_and_overflow():
    with pytest.raises(ParameterOrder):
        c159_log(1.5, 0.5, 3)
    with pytest.raises(AlphaOutOfRange):
        c159_log(0.5, 1.2, 3)
    with pytest.raises(Overflow):
        c159_log(0.05, 0.05, 400)


def test_c159_log_beyond_float_inputs():
    # a cascade factor of e^-120 (not representable concerns aside) still works
    got = c159_log(LogScalar(-120.0), 0.66, 5)
    want = 120.0 / (0.66**4 * 0.34)
    assert got.ln == pytest.approx(want, rel=1e-12)


def test_c170_matches_oracle():
    cert = build_certificate_constants(OP, PSI, LOC, n_balls=3, alpha=0.5)
    r = cert["r"]
    ref = oracle.c170(2, PSI.vol, r, OP.b1)
    if math.isfinite(ref) and ref > 0.0:
        assert cert.ln("c170") == pytest.approx(math.log(ref), rel=1e-9)
    else:
        # oracle float formula left double range; compare in log space
        ln_ref = (
            math.log(PSI.vol)
            - math.log(unit_ball_volume(3))
            - 3.0 * (math.log(r) - math.log(4.0 * math.sqrt(max(OP.b1, 1.0))))
        )
        assert cert.ln("c170") == pytest.approx(ln_ref, rel=1e-9)


def test_gevrey_rescaled_scaling_law():
    # prefactor transforms as c -> c * scale^-alpha-consistent power law:
    # rescaling twice composes multiplicatively
    a = gevrey_rescaled(1.3, 0.5)
    b = gevrey_rescaled(a, 0.5)
    c = gevrey_rescaled(1.3, 0.25)
    assert b == pytest.approx(c, rel=1e-12)


def test_c120_unified_divergence_guard():
    assert c120_unified(0.5, 0.5) > 0.0
    with pytest.raises(DivergentConstant):
        c120_unified(1.0, 0.5)


def test_companion_inputs_defaults_and_validation():
    comp = CompanionInputs()
    assert comp.defaults_in_use() == ("c101", "c102", "c112", "c118", "c1x")
    partial = CompanionInputs(c101=2.0, c118=3.0)
    assert "c101" not in partial.defaults_in_use()
    assert "c112" in partial.defaults_in_use()
    with pytest.raises(NonPositiveInput):
        CompanionInputs(c102=-1.0)
    with pytest.raises(ParameterOrder):
        CompanionInputs(c118=0.5)


def test_conditional_on_propagates():
    cert = build_certificate_constants(
        OP, PSI, LOC, companion=CompanionInputs(), n_balls=3, alpha=0.5
    )
    assert cert.conditional_on == ("c101", "c102", "c112", "c118", "c1x")
    cert2 = build_certificate_constants(
        OP,
        PSI,
        LOC,
        companion=CompanionInputs(c101=1.7, c102=0.4, c112=2.2, c118=1.9, c1x=0.8),
        n_balls=3,
        alpha=0.5,
    )
    assert cert2.conditional_on == ()


def test_psi_data_validation():
    with pytest.raises(NonPositiveInput):
        PsiData(n=2, psi_d1=0.0, psi_d2=0.0, cl=1.0, p1=1.0, psi_min=0.0, psi_max=1.0, dist=1.0, vol=1.0)
    with pytest.raises(ParameterOrder):
        PsiData(n=2, psi_d1=1.0, psi_d2=0.0, cl=1.0, p1=1.0, psi_min=1.0, psi_max=1.0, dist=1.0, vol=1.0)
    with pytest.raises(Exception):
        PsiData(n=2, psi_d1=1.0, psi_d2=0.0, cl=1.0, p1=1.0, psi_min=0.0, psi_max=1.0, dist=1.0, vol=1.0, rho=1.5)


def test_filter_input_validation():
    with pytest.raises(BetaTooSmall):
        gevrey_filter_constants(LOC, beta1=2.0, support_vol=1.0)
    with pytest.raises(NonPositiveInput):
        gevrey_filter_constants(LOC, beta1=4.0, support_vol=0.0)


def test_measured_localizer_profile_feeds_pipeline():
    bump = measure_bump(0.5, n_samples=4096)
    loc = localizer_profile_from_bump(bump)
    assert loc.alpha == 0.5
    assert loc.c1_b > 0.0 and loc.chi1_d1 > 0.0 and loc.chi1_d2 > 0.0
    cert = build_certificate_constants(OP, PSI, loc, n_balls=3, alpha=0.5)
    assert math.isfinite(cert.ln("c160"))


def test_monotonicity_tighter_inputs_tighter_certificate():
    # shrinking the observation distance shrinks the admissible radii chain
    psi_far = PsiData(
        n=2, psi_d1=S5H, psi_d2=0.0, cl=S5H, p1=0.75,
        psi_min=0.01, psi_max=0.25, dist=0.05, vol=1.0,
    )
    rows_near = _pipeline_rows()
    rows_far = dict(pseudoconvexity_constants(OP, psi_far))
    rows_far.update(radii_constants(rows_far, OP, psi_far))
    assert rows_far["R1"] <= rows_near["R1"]
    assert rows_far["R2"] <= rows_near["R2"] + 1e-15
    assert rows_far["r"] <= rows_near["r"] + 1e-15
    # rougher weight grows the pseudoconvexity budget
    psi_rough = PsiData(
        n=2, psi_d1=2.0 * S5H, psi_d2=0.0, cl=S5H, p1=0.75,
        psi_min=0.01, psi_max=0.25, dist=0.25, vol=1.0,
    )
    rough = pseudoconvexity_constants(OP, psi_rough)
    base = pseudoconvexity_constants(OP, PSI)
    assert rough["C3"] >= base["C3"]
    assert rough["M1"] >= base["M1"]


def test_unit_ball_volume_closed_forms():
    assert unit_ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)
