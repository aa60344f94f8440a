"""Probabilistic caching in N-tier cellular networks: analysis, optimization,
tradeoff laws and a Monte Carlo oracle for the successful delivery probability."""

from .analytics import (
    AssociationMatrix,
    QuadratureSettings,
    UndefinedDistributionError,
    association_matrix,
    conditional_sdp,
    serving_distance_pdf,
    total_sdp_general,
    total_sdp_interference_limited,
)
from .model import (
    CachingPolicy,
    ContentCatalog,
    NetworkConfig,
    PolicyViolation,
    SdpReport,
    TierParams,
    db_to_linear,
    dbm_to_watts,
    density_per_m2,
    make_zipf_catalog,
    validate_policy,
    watts_to_dbm,
)
from .optimize import (
    KktCertificate,
    ObjectiveConstants,
    SolveOptions,
    achieved_sdp,
    baseline_popular,
    baseline_uniform,
    kkt_certificate,
    objective_constants,
    project_capped_simplex,
    sdp_gradient,
    solve_p1,
    solve_p2_equivalent,
    solve_single_tier,
)
from .simulate import (
    Realization,
    SimEstimate,
    SimSettings,
    estimate_sdp,
    realization_stream,
    sample_realization,
)
from .specfun import (
    ChannelConstants,
    NumericalError,
    beta_fn,
    channel_constants,
    gauss_2f1_neg_arg,
)
from .tradeoff import (
    DegenerateTradeoffError,
    TradeoffCurve,
    UniformCacheSummary,
    cross_tier_curves,
    equivalent_cache_size,
    same_tier_density_curve,
    same_tier_power_curve,
    uniform_sdp,
)

__version__ = "0.1.0"
