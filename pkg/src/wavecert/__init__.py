"""Explicit logarithmic stability certificates for the wave operator.

The package computes, from a metric field and the geometric parameters of
an observation cylinder, every constant of the quantitative unique
continuation estimate

    ||u||_{L2} <= c160 ||u||_{H1} / (ln(1 + ||u||_{H1} / ||Pu||_{L2}))^theta

fully explicitly, and validates the supporting geometric lemmas and
frequency-filter estimates numerically at desk scale: influence domains
and their level-set gaps, greedy ball coverings with per-center support
certificates, the frequency cascade, Gevrey localizer profiles, and a
finite-difference wave lab for the measured counterparts.
"""

from .constants import (
    CertificateConstants,
    CompanionInputs,
    ConstantRecord,
    LocalizerProfile,
    OperatorBounds,
    PsiData,
    build_certificate_constants,
    localizer_profile_from_bump,
    operator_bounds_from_field,
)
from .covering import (
    Covering,
    CoveringReport,
    InfluenceCovering,
    ball_count_bound,
    covering_report,
    cut_masks,
    export_covering_csv,
    greedy_cover,
    influence_cover,
    influence_radius_cap,
    measure_volume,
)
from .domains import (
    GapReport,
    HyperbolicFunction,
    InclusionReport,
    InfluenceSets,
    PsiRegularityReport,
    check_inclusions,
    empirical_level_gap,
    influence_sets,
    level_set_gap,
    psi_regularity_report,
    recenter,
)
from .errors import (
    ConfigError,
    EmptyRegion,
    GeometryViolated,
    NonPositiveInput,
    Overflow,
    ParameterOrder,
    SupportConditionViolated,
    WavecertError,
)
from .gevrey import GevreyBump, bump, measure_bump, smooth_step, window
from .gridio import GridField, read_grid, write_grid
from .logspace import LogScalar, log_max, softplus_ln, softplus_of_large
from .metric import (
    GeodesicField,
    MetricField,
    build_metric_field,
    conformal_metric,
    diagonal_poly_metric,
    geodesic_distance,
    geodesic_distance_oracle,
    identity_metric,
    minimizing_geodesic,
)
from .report import (
    CertificateReport,
    RunConfig,
    default_config,
    emit_report,
    load_config,
    render_human_table,
    resolve_config,
    run_certificate,
    run_experiments,
)
from .stability import (
    CascadeSchedule,
    StabilityModulus,
    TimeGap,
    cascade,
    cascade_lower_bound,
    cascade_threshold,
    modulus,
    optimal_time_gap,
)
from .wavelab import (
    GridFunction,
    cfl_limit,
    corollary_experiment,
    energy,
    filter_lemma_check,
    gevrey_bump,
    l2_norm,
    light_cone_check,
    sobolev_norm,
    solve_wave,
    tail_check,
    time_filter,
)

__version__ = "1.0.0"
