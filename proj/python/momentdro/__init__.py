"""Exact worst-case bounds for bivariate demand under mean-covariance
ambiguity, with robust newsvendor solvers and verification oracles."""

from momentdro._core import (
    ConsistencyError,
    DegenerateError,
    DiscreteDistribution,
    DualCertificate,
    GapReport,
    GridConfig,
    InfeasibleError,
    LpInfeasibleError,
    MarginalBlock,
    MomentSpec,
    NewsvendorSolution,
    OracleResult,
    PiecewiseQuadratic,
    ReducedLoss,
    SdpProblem,
    SdpaFile,
    UnivariateSpec,
    __version__,
    bcm_objective,
    build_sdp,
    classify,
    dual_certificate,
    export_sdpa,
    find_sos_witness,
    from_correlation,
    lp_worst_case,
    max_prob_below,
    multivariate_upper_bound,
    order_gap,
    parse_sdpa,
    pooled_moments,
    reduce_loss,
    relative_gap,
    scarf_distribution,
    scarf_order,
    scarf_value,
    sdpa_data,
    shifting_bound,
    solve_bcm,
    solve_bdm,
    solve_ucm,
    stationary_points,
    validate,
    verify_certificate,
    verify_duality,
    worst_case_condition,
    worst_case_distribution,
    worst_case_value,
)

__all__ = [
    "ConsistencyError",
    "DegenerateError",
    "DiscreteDistribution",
    "DualCertificate",
    "GapReport",
    "GridConfig",
    "InfeasibleError",
    "LpInfeasibleError",
    "MarginalBlock",
    "MomentSpec",
    "NewsvendorSolution",
    "OracleResult",
    "PiecewiseQuadratic",
    "ReducedLoss",
    "SdpProblem",
    "SdpaFile",
    "UnivariateSpec",
    "__version__",
    "bcm_objective",
    "build_sdp",
    "classify",
    "dual_certificate",
    "export_sdpa",
    "find_sos_witness",
    "from_correlation",
    "lp_worst_case",
    "max_prob_below",
    "multivariate_upper_bound",
    "order_gap",
    "parse_sdpa",
    "pooled_moments",
    "reduce_loss",
    "relative_gap",
    "scarf_distribution",
    "scarf_order",
    "scarf_value",
    "sdpa_data",
    "shifting_bound",
    "solve_bcm",
    "solve_bdm",
    "solve_ucm",
    "stationary_points",
    "validate",
    "verify_certificate",
    "verify_duality",
    "worst_case_condition",
    "worst_case_distribution",
    "worst_case_value",
]
