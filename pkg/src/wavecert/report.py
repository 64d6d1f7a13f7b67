"""Run configuration, certificate pipeline, and report emission.

The pipeline assembles, from a metric source and the geometric parameters
``(z0, ell, T, gamma)``, the fully explicit stability certificate:

    geometry -> psi data -> constants table -> covering ->
    frequency cascade -> stability modulus -> zero-source corollary

Every number in the emitted report is either measured on the grid or
computed from the closed-form constant formulas.  Reruns on the same
configuration produce a byte-identical report body; wall-clock timings
are kept outside the canonical body for exactly that reason.

Configuration is a single YAML file.  Every omitted parameter takes a
documented default and the resolved values, together with the list of
defaulted keys, are printed into the report -- there are no silent
defaults.  The admissibility ranges (ell <= i0/4, T > ell,
0 < gamma <= T - ell) are validated on load and a violation names the
failing clause.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import yaml

from .constants import (
    CertificateConstants,
    CompanionInputs,
    build_certificate_constants,
    localizer_profile_from_bump,
    operator_bounds_from_field,
    PsiData,
)
from .covering import (
    ball_count_bound,
    covering_report,
    export_covering_csv,
    influence_cover,
    measure_volume,
)
from .domains import (
    HyperbolicFunction,
    check_inclusions,
    empirical_level_gap,
    influence_sets,
    level_set_gap,
    psi_regularity_report,
)
from .errors import ConfigError, WavecertError
from .gevrey import bump as gevrey_profile
from .logspace import LogScalar, softplus_ln
from .metric import (
    conformal_metric,
    diagonal_poly_metric,
    geodesic_distance,
    identity_metric,
)
from .wavelab import (
    GridFunction,
    corollary_experiment,
    filter_lemma_check,
    gevrey_bump,
    l2_norm,
    solve_wave,
)

SCHEMA = "wavecert-report/1"

__all__ = [
    "SCHEMA",
    "RunConfig",
    "CertificateReport",
    "default_config",
    "load_config",
    "resolve_config",
    "run_certificate",
    "run_experiments",
    "emit_report",
    "render_human_table",
]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_DEFAULTS: dict[str, dict[str, Any]] = {
    "metric": {
        "kind": "identity",  # identity | conformal | diagonal
        "extent": [[-2.0, 2.0], [-2.0, 2.0]],
        "nodes": 129,
        "i0": 0.9,
        "amplitude": 0.2,  # size of the speed / diagonal perturbation
        "width": 1.0,  # width of the conformal speed bump
    },
    "geometry": {
        "z0": [0.0, 0.0],
        "ell": 0.1,
        "T": 0.5,
        "gamma": 0.15,
        "n_time": 65,
    },
    "cascade": {
        "mode": "theta-first",  # theta-first | alpha-first
        "theta": 0.125,
        "alpha": 0.66,
        "n_balls": 5,
    },
    "localizer": {
        "support": 2.0,
        "sharpness": 16384,
    },
    "covering": {
        "r": 0.2,  # demonstration radius resolvable on the lattice
        "R": 0.6,
    },
    "companion": {
        "c101": 1.0,
        "c102": 1.0,
        "c112": 1.0,
        "c118": 1.0,
        "c1x": 1.0,
    },
    "experiments": {
        "suites": [],  # subset of {"filter", "corollary"}
        "seed": 20260822,
        "filter_mu": [4.0, 8.0, 16.0, 32.0],
        "beta1": 4.0,
        "samples": 16384,
        "dt": 0.02,
        "amplitudes": 9,  # points of the log amplitude sweep
    },
    "corollary": {
        "data_radius": 0.6,
        "data_alpha": 0.7,
        "cfl_margin": 0.9,
    },
    "checks": {
        "inclusion_samples": 20000,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters with the record of defaulted keys."""

    metric_kind: str
    extent: tuple[tuple[float, float], ...]
    nodes: int
    i0: float
    amplitude: float
    width: float
    z0: tuple[float, ...]
    ell: float
    T: float
    gamma: float
    n_time: int
    mode: str
    theta: float
    alpha: float
    n_balls: int
    loc_support: float
    loc_sharpness: int
    cover_r: float
    cover_R: float
    companion: tuple[tuple[str, float], ...]
    suites: tuple[str, ...]
    seed: int
    filter_mu: tuple[float, ...]
    beta1: float
    samples: int
    dt: float
    amplitudes: int
    data_radius: float
    data_alpha: float
    cfl_margin: float
    inclusion_samples: int
    defaulted: tuple[str, ...]
    source: str

    def resolved(self) -> dict[str, Any]:
        """Nested dict of every resolved parameter, for the report body."""
        return {
            "metric": {
                "kind": self.metric_kind,
                "extent": [list(e) for e in self.extent],
                "nodes": self.nodes,
                "i0": self.i0,
                "amplitude": self.amplitude,
                "width": self.width,
            },
            "geometry": {
                "z0": list(self.z0),
                "ell": self.ell,
                "T": self.T,
                "gamma": self.gamma,
                "n_time": self.n_time,
            },
            "cascade": {
                "mode": self.mode,
                "theta": self.theta,
                "alpha": self.alpha,
                "n_balls": self.n_balls,
            },
            "localizer": {
                "support": self.loc_support,
                "sharpness": self.loc_sharpness,
            },
            "covering": {"r": self.cover_r, "R": self.cover_R},
            "companion": dict(self.companion),
            "experiments": {
                "suites": list(self.suites),
                "seed": self.seed,
                "filter_mu": list(self.filter_mu),
                "beta1": self.beta1,
                "samples": self.samples,
                "dt": self.dt,
                "amplitudes": self.amplitudes,
            },
            "corollary": {
                "data_radius": self.data_radius,
                "data_alpha": self.data_alpha,
                "cfl_margin": self.cfl_margin,
            },
            "checks": {"inclusion_samples": self.inclusion_samples},
        }


def default_config() -> dict[str, dict[str, Any]]:
    """Deep copy of the documented defaults."""
    return {sec: dict(vals) for sec, vals in _DEFAULTS.items()}


def _coerce(key: str, value: Any, template: Any) -> Any:
    """Coerce a raw config value to the type of its default."""
    try:
        if isinstance(template, bool):
            return bool(value)
        if isinstance(template, int):
            out = int(value)
            if float(value) != out:
                raise ValueError
            return out
        if isinstance(template, float):
            return float(value)
        if isinstance(template, str):
            if not isinstance(value, str):
                raise ValueError
            return value
        if isinstance(template, list):
            if not isinstance(value, (list, tuple)):
                raise ValueError
            return list(value)
    except (TypeError, ValueError):
        raise ConfigError(f"configuration key {key} has invalid value {value!r}") from None
    return value


def resolve_config(
    raw: Mapping[str, Any] | None,
    overrides: Mapping[str, Any] | None = None,
    source: str = "<defaults>",
) -> RunConfig:
    """Merge raw settings over the defaults and validate admissibility.

    ``overrides`` maps dotted keys (``"metric.nodes"``) to values set on
    the command line; they count as explicitly given, not defaulted.
    Unknown sections or keys are rejected, never ignored.
    """
    raw = {} if raw is None else dict(raw)
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping of sections")

    merged: dict[str, dict[str, Any]] = {}
    defaulted: list[str] = []
    for section, defaults in _DEFAULTS.items():
        given = raw.pop(section, None)
        if given is None:
            given = {}
        if not isinstance(given, Mapping):
            raise ConfigError(f"configuration section {section!r} must be a mapping")
        given = dict(given)
        resolved: dict[str, Any] = {}
        for key, default in defaults.items():
            if key in given:
                resolved[key] = _coerce(f"{section}.{key}", given.pop(key), default)
            else:
                resolved[key] = default
                defaulted.append(f"{section}.{key}")
        if given:
            bad = sorted(given)[0]
            raise ConfigError(f"unknown configuration key: {section}.{bad}")
        merged[section] = resolved
    if raw:
        raise ConfigError(f"unknown configuration section: {sorted(raw)[0]}")

    for key, value in (overrides or {}).items():
        section, _, name = key.partition(".")
        if section not in _DEFAULTS or name not in _DEFAULTS[section]:
            raise ConfigError(f"unknown override key: {key}")
        merged[section][name] = _coerce(key, value, _DEFAULTS[section][name])
        if key in defaulted:
            defaulted.remove(key)

    m, g, c = merged["metric"], merged["geometry"], merged["cascade"]
    loc, cov, comp = merged["localizer"], merged["covering"], merged["companion"]
    ex, cor, chk = merged["experiments"], merged["corollary"], merged["checks"]

    if m["kind"] not in ("identity", "conformal", "diagonal"):
        raise ConfigError(f"metric.kind must be identity, conformal, or diagonal, got {m['kind']!r}")
    extent = []
    for k, pair in enumerate(m["extent"]):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"metric.extent[{k}] must be a [lo, hi] pair")
        lo, hi = float(pair[0]), float(pair[1])
        if not lo < hi:
            raise ConfigError(f"metric.extent[{k}] must satisfy lo < hi")
        extent.append((lo, hi))
    if m["nodes"] < 9:
        raise ConfigError("metric.nodes must be at least 9")
    if m["i0"] <= 0.0:
        raise ConfigError("metric.i0 must be positive")

    z0 = tuple(float(v) for v in g["z0"])
    if len(z0) != len(extent):
        raise ConfigError("geometry.z0 dimension must match metric.extent")
    ell, T, gamma = float(g["ell"]), float(g["T"]), float(g["gamma"])
    i0 = float(m["i0"])
    if not ell > 0.0:
        raise ConfigError("geometry.ell must be positive")
    if ell > i0 / 4.0:
        raise ConfigError(
            f"Assumption A5 clause 'ell <= i0/4' violated: ell={ell} exceeds i0/4={i0 / 4.0}"
        )
    if not T > ell:
        raise ConfigError(f"Assumption A5 clause 'T > ell' violated: T={T}, ell={ell}")
    if not 0.0 < gamma <= T - ell:
        raise ConfigError(
            f"Assumption A5 clause '0 < gamma <= T - ell' violated: gamma={gamma}, T - ell={T - ell}"
        )
    if g["n_time"] < 5 or g["n_time"] % 2 == 0:
        raise ConfigError("geometry.n_time must be an odd integer >= 5")

    if c["mode"] not in ("theta-first", "alpha-first"):
        raise ConfigError("cascade.mode must be theta-first or alpha-first")
    if not 0.0 < c["theta"] < 1.0:
        raise ConfigError("cascade.theta must lie in (0, 1)")
    if not 0.0 < c["alpha"] < 1.0:
        raise ConfigError("cascade.alpha must lie in (0, 1)")
    if c["n_balls"] < 1:
        raise ConfigError("cascade.n_balls must be at least 1")

    if loc["support"] <= 0.0:
        raise ConfigError("localizer.support must be positive")
    if loc["sharpness"] < 256:
        raise ConfigError("localizer.sharpness must be at least 256")
    if not 0.0 < cov["r"] <= cov["R"]:
        raise ConfigError("covering must satisfy 0 < r <= R")
    for name, value in comp.items():
        if float(value) <= 0.0:
            raise ConfigError(f"companion.{name} must be positive")
    if float(comp["c118"]) < 1.0:
        raise ConfigError("companion.c118 must be at least 1")

    suites = tuple(ex["suites"])
    for s in suites:
        if s not in ("filter", "corollary"):
            raise ConfigError(f"experiments.suites entry {s!r} is not a known suite")
    if ex["beta1"] <= 2.0:
        raise ConfigError("experiments.beta1 must exceed 2")
    if ex["samples"] < 1024:
        raise ConfigError("experiments.samples must be at least 1024")
    if ex["dt"] <= 0.0:
        raise ConfigError("experiments.dt must be positive")
    if ex["amplitudes"] < 2:
        raise ConfigError("experiments.amplitudes must be at least 2")
    if not 0.0 < cor["cfl_margin"] <= 1.0:
        raise ConfigError("corollary.cfl_margin must lie in (0, 1]")
    if not 0.0 < cor["data_alpha"] < 1.0:
        raise ConfigError("corollary.data_alpha must lie in (0, 1)")
    if cor["data_radius"] <= 0.0:
        raise ConfigError("corollary.data_radius must be positive")
    if chk["inclusion_samples"] < 100:
        raise ConfigError("checks.inclusion_samples must be at least 100")

    return RunConfig(
        metric_kind=m["kind"],
        extent=tuple(extent),
        nodes=int(m["nodes"]),
        i0=i0,
        amplitude=float(m["amplitude"]),
        width=float(m["width"]),
        z0=z0,
        ell=ell,
        T=T,
        gamma=gamma,
        n_time=int(g["n_time"]),
        mode=c["mode"],
        theta=float(c["theta"]),
        alpha=float(c["alpha"]),
        n_balls=int(c["n_balls"]),
        loc_support=float(loc["support"]),
        loc_sharpness=int(loc["sharpness"]),
        cover_r=float(cov["r"]),
        cover_R=float(cov["R"]),
        companion=tuple(sorted((k, float(v)) for k, v in comp.items())),
        suites=suites,
        seed=int(ex["seed"]),
        filter_mu=tuple(float(v) for v in ex["filter_mu"]),
        beta1=float(ex["beta1"]),
        samples=int(ex["samples"]),
        dt=float(ex["dt"]),
        amplitudes=int(ex["amplitudes"]),
        data_radius=float(cor["data_radius"]),
        data_alpha=float(cor["data_alpha"]),
        cfl_margin=float(cor["cfl_margin"]),
        inclusion_samples=int(chk["inclusion_samples"]),
        defaulted=tuple(defaulted),
        source=source,
    )


def load_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Load a YAML configuration file, or the pure defaults when ``path`` is None."""
    if path is None:
        return resolve_config(None, overrides, source="<defaults>")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {p}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration file {p} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    return resolve_config(raw, overrides, source=str(p))


# ---------------------------------------------------------------------------
# report container
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    """Assembled report with the canonical body and out-of-band timings."""

    body: dict[str, Any]
    timings: dict[str, float]
    covering_blob: bytes | None = None
    covering_obj: Any = None

    @property
    def ok(self) -> bool:
        return bool(self.body.get("ok", False))

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def canonical_body(self) -> bytes:
        """Deterministic serialization of the body; timings excluded."""
        return (
            json.dumps(self.body, sort_keys=True, indent=2, allow_nan=False) + "\n"
        ).encode()

    def document(self) -> dict[str, Any]:
        return {"schema": SCHEMA, "body": self.body, "timings": self.timings}


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars and containers to JSON-safe natives.

    Non-finite floats map to None so the canonical body stays strict JSON;
    log values carry the magnitude in those rows.
    """
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if math.isfinite(f) else None
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------


def _build_metric(cfg: RunConfig):
    if cfg.metric_kind == "identity":
        return identity_metric(cfg.extent, cfg.nodes, i0=cfg.i0)
    if cfg.metric_kind == "conformal":
        amp, width = cfg.amplitude, cfg.width

        def speed(*mesh):
            r2 = sum(np.asarray(x) ** 2 for x in mesh)
            return 1.0 + amp * np.exp(-r2 / (2.0 * width**2))

        return conformal_metric(cfg.extent, cfg.nodes, speed, i0=cfg.i0)
    amp = cfg.amplitude
    diag = [
        (lambda *mesh, k=k: 1.0 + amp * np.asarray(mesh[k]) ** 2 / (1.0 + np.asarray(mesh[k]) ** 2))
        for k in range(len(cfg.extent))
    ]
    return diagonal_poly_metric(cfg.extent, cfg.nodes, diag, i0=cfg.i0)


def _record_row(rec) -> dict[str, Any]:
    mant, exp10 = rec.mantissa_exponent()
    return {
        "name": rec.name,
        "formula_id": rec.formula_id,
        "direction": rec.direction,
        "value": _jsonable(rec.value),
        "ln_value": rec.ln_value,
        "mantissa": mant,
        "exp10": exp10,
        "inputs": list(rec.inputs),
    }


def _cascade_ladder(cert: CertificateConstants, c131: float) -> dict[str, Any]:
    """Log-space frequency ladder started one e-fold above the threshold.

    The ladder holds one filter width per covering ball: mu_0 = e * c159
    keeps all N rungs of the map ln mu_j = alpha ln mu_{j-1} + ln c156
    above one, and the final low-pass width is omega = mu_{N-1}^alpha /
    (3 c131).
    """
    alpha = cert.alpha
    ln_c156 = cert.ln("c156")
    ln_c159 = cert.ln("c159")
    ln_mu = 1.0 + ln_c159
    rungs = []
    for j in range(cert.n_balls):
        ls = LogScalar(ln_mu)
        mant, exp10 = ls.mantissa_exponent()
        rungs.append({"j": j, "ln_mu": ln_mu, "mantissa": mant, "exp10": exp10})
        if j < cert.n_balls - 1:
            ln_mu = alpha * ln_mu + ln_c156
    ln_omega = alpha * rungs[-1]["ln_mu"] - math.log(3.0 * c131)
    omega_ls = LogScalar(ln_omega)
    mant, exp10 = omega_ls.mantissa_exponent()
    return {
        "start_rule": "mu_0 = e * c159",
        "rungs": rungs,
        "ln_omega": ln_omega,
        "omega_mantissa": mant,
        "omega_exp10": exp10,
        "above_one": bool(min(r["ln_mu"] for r in rungs) > 0.0),
    }


def _modulus_curve(cert: CertificateConstants, points: int = 41) -> list[dict[str, Any]]:
    """Bound values along a log grid of source norms at unit solution norm.

    Case A caps the bound by the trivial estimate (the solution norm
    itself); the crossover sits at ln ratio = c159.
    """
    ln_c159 = cert.ln("c159")
    ln_c160 = cert.ln("c160")
    theta = cert.theta
    rows = []
    for ln_ratio in np.linspace(0.0, 2.0 * ln_c159, points):
        ln_ratio = float(ln_ratio)
        case = "A" if ln_ratio <= ln_c159 else "B"
        if case == "A":
            ln_bound = 0.0
        else:
            ln_bound = ln_c160 - theta * math.log(softplus_ln(ln_ratio))
        ls = LogScalar(ln_bound)
        mant, exp10 = ls.mantissa_exponent()
        rows.append(
            {
                "ln_source": -ln_ratio,
                "ln_ratio": ln_ratio,
                "case": case,
                "ln_bound": ln_bound,
                "bound_mantissa": mant,
                "bound_exp10": exp10,
            }
        )
    return rows


def run_certificate(cfg: RunConfig) -> CertificateReport:
    """Execute the full pipeline and assemble the report.

    The run is deterministic: identical configurations produce identical
    report bodies.  A stage failure produces a partial report naming the
    failing stage; the exit code is zero exactly when every check passes.
    """
    body: dict[str, Any] = {
        "schema": SCHEMA,
        "config_source": cfg.source,
        "config_resolved": cfg.resolved(),
        "defaulted": list(cfg.defaulted),
    }
    companion = CompanionInputs(**dict(cfg.companion))
    banner = companion.defaults_in_use()
    body["conditional_on"] = list(banner)
    body["conditional_banner"] = (
        "CONDITIONAL CERTIFICATE: companion inputs at default 1.0: " + ", ".join(banner)
        if banner
        else None
    )

    timings: dict[str, float] = {}
    checks: dict[str, bool] = {"a5_parameters": True}
    report = CertificateReport(body=body, timings=timings)
    state: dict[str, Any] = {}

    def geometry_stage() -> None:
        field = _build_metric(cfg)
        geo = geodesic_distance(field, cfg.z0)
        times = np.linspace(-cfg.T, cfg.T, cfg.n_time)
        sets = influence_sets(geo, times, cfg.ell, cfg.T, cfg.gamma, enforce_small_cylinder=True)
        inclusion = check_inclusions(sets, n_samples=cfg.inclusion_samples, seed=0)
        gap = empirical_level_gap(sets)
        state.update(field=field, geo=geo, times=times, sets=sets)
        body["geometry"] = {
            "spacing": [float(h) for h in field.spacing],
            "a0": field.a0,
            "b0": field.b0,
            "t_lg": sets.t_lg,
            "inclusion": {
                "n_nodes": inclusion.n_nodes,
                "n_samples": inclusion.n_samples,
                "node_violations": list(inclusion.node_violations),
                "sample_violations": list(inclusion.sample_violations),
                "cylinder_violations": inclusion.cylinder_violations,
                "total": inclusion.total_violations,
            },
            "level_gap": {
                "c180": gap.c180,
                "empirical_min": gap.empirical_min,
                "grid_step": gap.grid_step,
                "n_inner": gap.n_inner,
                "n_outer": gap.n_outer,
                "ok": gap.ok,
            },
        }
        checks["inclusion_chain"] = inclusion.total_violations == 0
        checks["level_set_gap"] = gap.ok

    def regularity_stage() -> None:
        sets, times, field = state["sets"], state["times"], state["field"]
        H = HyperbolicFunction(geo=state["geo"], T=cfg.T)
        gamma_i = cfg.gamma / math.sqrt(2.0)
        reg = psi_regularity_report(H, sets.omega0, times, gamma_i, cfg.ell)
        psi_vals = sets.psi[sets.omega0]
        vol = measure_volume(sets.omega0, times, field.axes)
        psi = PsiData(
            n=field.n,
            psi_d1=reg.sup_psi1,
            psi_d2=reg.sup_psi2,
            cl=reg.grad_min,
            p1=reg.p_min,
            psi_min=float(np.min(psi_vals)),
            psi_max=float(np.max(psi_vals)),
            dist=level_set_gap(cfg.T, cfg.ell, cfg.gamma),
            vol=vol,
            psi_d3=reg.sup_psi3,
            rho=1.0,
        )
        state["psi"] = psi
        body["psi_data"] = {
            "gamma_i": reg.gamma_i,
            "n_nodes": reg.n_nodes,
            "p_min": reg.p_min,
            "p_bound": reg.p_bound,
            "grad_min": reg.grad_min,
            "grad_bound": reg.grad_bound,
            "sup_psi1": reg.sup_psi1,
            "sup_psi2": reg.sup_psi2,
            "sup_psi3": reg.sup_psi3,
            "b4": reg.b4,
            "psi_min": psi.psi_min,
            "psi_max": psi.psi_max,
            "dist": psi.dist,
            "vol": vol,
        }
        checks["psi_pseudoconvexity"] = bool(reg.p_ok and reg.grad_ok)
        checks["psi_derivative_bounds"] = bool(all(reg.derivative_ok))

    def constants_stage() -> None:
        field, psi = state["field"], state["psi"]
        op = operator_bounds_from_field(field)
        alpha_run = cfg.theta ** (1.0 / cfg.n_balls) if cfg.mode == "theta-first" else cfg.alpha
        gb = gevrey_bump(alpha_run, support=cfg.loc_support, sharpness=cfg.loc_sharpness)
        loc = localizer_profile_from_bump(gb)
        if cfg.mode == "theta-first":
            cert = build_certificate_constants(
                op, psi, loc, companion, n_balls=cfg.n_balls, theta=cfg.theta
            )
        else:
            cert = build_certificate_constants(
                op, psi, loc, companion, n_balls=cfg.n_balls, alpha=cfg.alpha
            )
        state.update(op=op, bump=gb, cert=cert)
        body["operator_bounds"] = {
            "a1": op.a1,
            "b1": op.b1,
            "g_c0": op.g_c0,
            "g_c1": op.g_c1,
            "h_c0": op.h_c0,
            "q_c0": op.q_c0,
        }
        body["constants"] = [_record_row(rec) for rec in cert.records]
        body["mode"] = cert.mode
        body["alpha"] = cert.alpha
        body["theta"] = cert.theta
        body["n_balls"] = cert.n_balls
        checks["constants_finite_log"] = bool(
            all(math.isfinite(rec.ln_value) for rec in cert.records)
        )
        checks["theta_alpha_consistent"] = bool(
            abs(cert.alpha**cert.n_balls - cert.theta) <= 1e-12 * cert.theta
        )

    def covering_stage() -> None:
        geo, times, field = state["geo"], state["times"], state["field"]
        cert = state["cert"]
        icov = influence_cover(
            geo, times, cfg.T, cfg.ell, cfg.gamma, cfg.cover_r, cfg.cover_R, alpha=cert.alpha
        )
        cov = icov.covering
        count_bound = ball_count_bound(state["psi"].vol, cov.r, state["op"].b1, field.n)
        audit = covering_report(cov, icov.sets.lam, times, field.axes, count_bound=count_bound)
        state.update(icov=icov, cov=cov, audit=audit)
        blob = cov.serialize()
        report.covering_blob = blob
        report.covering_obj = cov
        body["covering"] = {
            "mode": cov.mode,
            "r_requested": cov.r_requested,
            "R_requested": cov.R_requested,
            "r_effective": cov.r,
            "R_effective": cov.R,
            "r0_cap": icov.r0_cap,
            "n_centers": cov.N,
            "recentered": icov.recentered_count,
            "psi_min_attained": cov.psi_min_attained,
            "support_checked_nodes": icov.support.checked_nodes,
            "support_violations": icov.support.violations,
            "psi_handoff_max_discrepancy": icov.max_psi_discrepancy,
            "psi_handoff_tol": icov.psi_discrepancy_tol,
            "min_separation": _jsonable(audit.min_separation),
            "uncovered_nodes": audit.uncovered_nodes,
            "count_bound": _jsonable(audit.count_bound),
            "certificate_r_ln": cert.ln("r"),
            "certificate_R_ln": cert.ln("R"),
            "sha256": hashlib.sha256(blob).hexdigest(),
        }
        checks["covering_separation"] = audit.separation_ok
        checks["covering_coverage"] = audit.coverage_ok
        checks["covering_psi_monotone"] = audit.psi_monotone_ok
        checks["covering_count_bound"] = audit.count_ok
        checks["covering_support_condition"] = icov.support.ok
        checks["covering_psi_handoff"] = bool(
            icov.max_psi_discrepancy <= icov.psi_discrepancy_tol
        )

    def cascade_stage() -> None:
        cert = state["cert"]
        ladder = _cascade_ladder(cert, cert["c131"])
        body["cascade"] = ladder
        body["modulus"] = {
            "c159_ln": cert.ln("c159"),
            "c160_ln": cert.ln("c160"),
            "c163_ln": cert.ln("c160"),
            "theta": cert.theta,
            "m": 1.0,
            "note": "uniform covering radii make the starred constants coincide; c163 = c160",
        }
        body["modulus_curve_rows"] = _jsonable(_modulus_curve(cert))
        checks["cascade_above_one"] = ladder["above_one"]

    def corollary_stage() -> None:
        field, geo, cert = state["field"], state["geo"], state["cert"]
        shape = field.shape
        mesh = np.meshgrid(*field.axes, indexing="ij")
        r2 = sum((mesh[k] - cfg.z0[k]) ** 2 for k in range(field.n))
        u0 = gevrey_profile(
            2.0 * np.sqrt(r2) / cfg.data_radius, cfg.data_alpha
        ).reshape(shape)
        w = solve_wave(
            field, None, u0, np.zeros(shape), cfg.T, cfl_margin=cfg.cfl_margin
        )
        out = corollary_experiment(
            field,
            cfg.z0,
            cfg.ell,
            cfg.gamma,
            cfg.T,
            w,
            c163=LogScalar(cert.ln("c160")),
            theta=cert.theta,
            alpha=cfg.data_alpha,
            geo=geo,
        )
        body["corollary"] = _jsonable(out)
        checks["corollary_inequality"] = bool(out["ok"])
        checks["corollary_nontrivial"] = bool(out.get("measured_left", 0.0) > 0.0)

    stages: list[tuple[str, Callable[[], None]]] = [
        ("geometry", geometry_stage),
        ("regularity", regularity_stage),
        ("constants", constants_stage),
        ("covering", covering_stage),
        ("cascade", cascade_stage),
        ("corollary", corollary_stage),
    ]
    for name, fn in stages:
        t0 = time.perf_counter()
        try:
            fn()
        except WavecertError as exc:
            timings[name] = time.perf_counter() - t0
            body["failure"] = {"stage": name, "error": f"{type(exc).__name__}: {exc}"}
            body["checks"] = _jsonable(checks)
            body["ok"] = False
            return report
        timings[name] = time.perf_counter() - t0

    body["checks"] = _jsonable(checks)
    body["ok"] = bool(all(checks.values()))
    return report


# ---------------------------------------------------------------------------
# experiment suites
# ---------------------------------------------------------------------------


def _filter_suite(cfg: RunConfig, report: CertificateReport) -> dict[str, Any]:
    """Filtered-commutator margins plus a measured-vs-bound amplitude sweep."""
    alpha = float(report.body["alpha"])
    gb = gevrey_bump(alpha, support=cfg.loc_support, sharpness=cfg.loc_sharpness)
    rng = np.random.default_rng(cfg.seed)
    nt = cfg.samples
    times = (np.arange(nt) - nt / 2.0) * cfg.dt
    x_axis = np.linspace(-1.0, 1.0, 9)
    values = rng.standard_normal((nt, x_axis.size))
    v = GridFunction(times=times, axes=(x_axis,), values=values)

    margins = filter_lemma_check(gb, v, mu_values=cfg.filter_mu, beta1=cfg.beta1)

    mu_ref = float(cfg.filter_mu[len(cfg.filter_mu) // 2])
    sweep = []
    for amp in np.logspace(-2.0, 2.0, cfg.amplitudes):
        va = v.with_values(values * amp)
        one = filter_lemma_check(gb, va, mu_values=(mu_ref,), beta1=cfg.beta1)
        sweep.append(
            {
                "amplitude": float(amp),
                "input_norm": one["norm_v"],
                "measured": one["left"][0],
                "bound": one["right"][0],
            }
        )
    return {"margins": margins, "sweep": sweep, "mu_ref": mu_ref}


def _corollary_suite(cfg: RunConfig, report: CertificateReport) -> dict[str, Any]:
    """Zero-source observability sweep: bound and measured norms vs data size."""
    field = _build_metric(cfg)
    geo = geodesic_distance(field, cfg.z0)
    shape = field.shape
    mesh = np.meshgrid(*field.axes, indexing="ij")
    r2 = sum((mesh[k] - cfg.z0[k]) ** 2 for k in range(field.n))
    u0 = gevrey_profile(2.0 * np.sqrt(r2) / cfg.data_radius, cfg.data_alpha).reshape(shape)
    w = solve_wave(field, None, u0, np.zeros(shape), cfg.T, cfl_margin=cfg.cfl_margin)
    c163 = LogScalar(float(report.body["modulus"]["c163_ln"]))
    theta = float(report.body["theta"])

    sweep = []
    for amp in np.logspace(-2.0, 2.0, cfg.amplitudes):
        wa = w.with_values(w.values * amp)
        out = corollary_experiment(
            field, cfg.z0, cfg.ell, cfg.gamma, cfg.T, wa,
            c163=c163, theta=theta, alpha=cfg.data_alpha, geo=geo,
        )
        sweep.append(
            {
                "amplitude": float(amp),
                "observation_norm": out["norm_w_w1"],
                "measured": out["measured_left"],
                "bound_ln": out["bound_ln"],
                "slack_ln": out["slack_ln"],
                "ok": out["ok"],
            }
        )
    return {"sweep": sweep}


def run_experiments(cfg: RunConfig) -> CertificateReport:
    """Run the certificate, then every configured experiment suite.

    An empty suite list reduces to the certificate alone.  Suite data is
    appended under ``body["experiments"]``; each suite contributes a check
    so the exit-code contract covers experimental violations too.
    """
    report = run_certificate(cfg)
    if "failure" in report.body or not cfg.suites:
        return report

    checks = dict(report.body["checks"])
    experiments: dict[str, Any] = {}
    for suite in cfg.suites:
        t0 = time.perf_counter()
        try:
            if suite == "filter":
                out = _filter_suite(cfg, report)
                checks["experiment_filter_margins"] = bool(
                    out["margins"]["all_nonnegative"]
                )
            else:
                out = _corollary_suite(cfg, report)
                checks["experiment_corollary_inequality"] = bool(
                    all(row["ok"] for row in out["sweep"])
                )
            experiments[suite] = _jsonable(out)
        except WavecertError as exc:
            report.timings[f"suite_{suite}"] = time.perf_counter() - t0
            report.body["failure"] = {
                "stage": f"suite_{suite}",
                "error": f"{type(exc).__name__}: {exc}",
            }
            report.body["experiments"] = experiments
            report.body["checks"] = _jsonable(checks)
            report.body["ok"] = False
            return report
        report.timings[f"suite_{suite}"] = time.perf_counter() - t0

    report.body["experiments"] = experiments
    report.body["checks"] = _jsonable(checks)
    report.body["ok"] = bool(all(checks.values()))
    return report


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _write_csv(path: Path, rows: Sequence[Mapping[str, Any]], fields: Sequence[str]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in fields})
    path.write_text(buf.getvalue())


def _csv_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(repr(float(v)) for v in value)
    return value


def emit_report(report: CertificateReport, out_dir: str | Path) -> dict[str, Path]:
    """Write the report document, canonical body, and CSV exports.

    One CSV per figure: the constants table, the cascade ladder, the
    modulus curve, the covering centers, and one file per experiment
    sweep.  Returns the mapping of artifact name to path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    doc_path = out / "report.json"
    doc_path.write_text(
        json.dumps(report.document(), sort_keys=True, indent=2, allow_nan=False) + "\n"
    )
    paths["report"] = doc_path

    body_path = out / "report.body.json"
    body_path.write_bytes(report.canonical_body())
    paths["body"] = body_path

    body = report.body
    if "constants" in body:
        const_path = out / "constants.csv"
        _write_csv(
            const_path,
            [
                {**row, "inputs": ";".join(row["inputs"])}
                for row in body["constants"]
            ],
            ["name", "formula_id", "direction", "value", "ln_value", "mantissa", "exp10", "inputs"],
        )
        paths["constants"] = const_path

    if "cascade" in body:
        casc_path = out / "cascade.csv"
        _write_csv(casc_path, body["cascade"]["rungs"], ["j", "ln_mu", "mantissa", "exp10"])
        paths["cascade"] = casc_path

    if report.covering_obj is not None:
        cov_csv = out / "covering.csv"
        export_covering_csv(report.covering_obj, str(cov_csv))
        paths["covering_csv"] = cov_csv
    if report.covering_blob is not None:
        cov_bin = out / "covering.wccov"
        cov_bin.write_bytes(report.covering_blob)
        paths["covering_bin"] = cov_bin

    curve = body.get("modulus_curve_rows")
    if curve:
        curve_path = out / "modulus_curve.csv"
        _write_csv(
            curve_path,
            curve,
            ["ln_source", "ln_ratio", "case", "ln_bound", "bound_mantissa", "bound_exp10"],
        )
        paths["modulus_curve"] = curve_path

    ex = body.get("experiments", {})
    if "filter" in ex:
        m = ex["filter"]["margins"]
        rows = [
            {
                "mu": m["mu"][i],
                "measured_left": m["left"][i],
                "bound_right": m["right"][i],
                "margin": m["margin"][i],
            }
            for i in range(len(m["mu"]))
        ]
        p = out / "filter_margins.csv"
        _write_csv(p, rows, ["mu", "measured_left", "bound_right", "margin"])
        paths["filter_margins"] = p
        p2 = out / "filter_scaling.csv"
        _write_csv(
            p2, ex["filter"]["sweep"], ["amplitude", "input_norm", "measured", "bound"]
        )
        paths["filter_scaling"] = p2
    if "corollary" in ex:
        p = out / "corollary_scaling.csv"
        _write_csv(
            p,
            ex["corollary"]["sweep"],
            ["amplitude", "observation_norm", "measured", "bound_ln", "slack_ln", "ok"],
        )
        paths["corollary_scaling"] = p

    return paths


# ---------------------------------------------------------------------------
# human-readable rendering
# ---------------------------------------------------------------------------


def _fmt_value(row: Mapping[str, Any]) -> str:
    v = row.get("value")
    if v is not None and abs(row["exp10"]) < 9:
        return f"{v:.9g}"
    return f"{row['mantissa']:.6f}e{row['exp10']:+d}"


def render_human_table(report: CertificateReport) -> str:
    """Plain-text summary printed by the command-line front end."""
    body = report.body
    lines: list[str] = []
    add = lines.append
    add(f"schema          {body['schema']}")
    add(f"config          {body['config_source']}")
    if body.get("conditional_banner"):
        add("")
        add("*** " + body["conditional_banner"] + " ***")
    if "mode" in body:
        add("")
        add(
            f"mode {body['mode']}   alpha {body['alpha']:.12g}   theta {body['theta']:.12g}"
            f"   N {body['n_balls']}"
        )
    if body.get("defaulted"):
        add("")
        add("defaulted keys  " + ", ".join(body["defaulted"]))
    if "constants" in body:
        add("")
        add(f"{'name':<12}{'dir':<4}{'value':>22}  {'ln':>14}  formula")
        add("-" * 72)
        for row in body["constants"]:
            add(
                f"{row['name']:<12}{row['direction']:<4}{_fmt_value(row):>22}"
                f"  {row['ln_value']:>14.6g}  {row['formula_id']}"
            )
    if "covering" in body:
        cov = body["covering"]
        add("")
        add(
            f"covering        N={cov['n_centers']}  r={cov['r_effective']:.6g}"
            f"  R={cov['R_effective']:.6g}  support violations={cov['support_violations']}"
            f"  uncovered={cov['uncovered_nodes']}"
        )
    if "cascade" in body:
        casc = body["cascade"]
        add("")
        add("cascade ladder  (" + casc["start_rule"] + ")")
        for rung in casc["rungs"]:
            add(
                f"  j={rung['j']:<3d} ln mu = {rung['ln_mu']:>14.6f}"
                f"   mu = {rung['mantissa']:.6f}e{rung['exp10']:+d}"
            )
        add(
            f"  omega        ln = {casc['ln_omega']:>14.6f}"
            f"   omega = {casc['omega_mantissa']:.6f}e{casc['omega_exp10']:+d}"
        )
    if "corollary" in body:
        cor = body["corollary"]
        add("")
        if cor.get("trivial"):
            add("corollary       trivial (observation region holds no signal)")
        else:
            add(
                f"corollary       measured={cor['measured_left']:.6g}"
                f"  bound ln={cor['bound_ln']:.6g}  slack ln={cor['slack_ln']:.6g}"
                f"  ok={cor['ok']}"
            )
    if "experiments" in body:
        ex = body["experiments"]
        if "filter" in ex:
            m = ex["filter"]["margins"]
            add("")
            add("filter margins")
            for i in range(len(m["mu"])):
                add(
                    f"  mu={m['mu'][i]:<6g} left={m['left'][i]:.3e}"
                    f"  right={m['right'][i]:.3e}  margin={m['margin'][i]:.3e}"
                )
        if "corollary" in ex:
            add("")
            add("corollary sweep")
            for row in ex["corollary"]["sweep"]:
                add(
                    f"  amp={row['amplitude']:<10.4g} measured={row['measured']:.4e}"
                    f"  slack ln={row['slack_ln']:.4g}  ok={row['ok']}"
                )
    if "failure" in body:
        add("")
        add(f"FAILED at stage {body['failure']['stage']}: {body['failure']['error']}")
    add("")
    if "checks" in body:
        for name in sorted(body["checks"]):
            add(f"check {name:<34} {'pass' if body['checks'][name] else 'FAIL'}")
    add("")
    add(f"result          {'PASS' if body.get('ok') else 'FAIL'}")
    return "\n".join(lines) + "\n"
