"""Throughput analysis, optimization and simulation of two-tier slotted-ALOHA relay systems."""

from ._mraloha import (
    EPS_FLOOR,
    K_CLOSED_MAX,
    DomainError,
    Error,
    InvalidConfigError,
    NonConvergenceError,
    OrderExceedsCacheError,
    SingularityError,
    StabilityError,
    FigureId,
    HCache,
    LoadRule,
    OptimizationMethod,
    OptimizationResult,
    SimConfig,
    SimMode,
    SimStats,
    SystemParams,
    ThroughputMethod,
    ThroughputResult,
    __version__,
    ancillary_h,
    ancillary_h_oracle,
    bound,
    bound_closed,
    bound_series,
    delta_star_k2,
    figure_csv,
    optimize_delta,
    optimize_k,
    optimize_load,
    p_decode_uplink,
    peak_load,
    poisson_pmf,
    s_star_k2,
    simulate,
    throughput,
    throughput_closed,
    throughput_k2_at_peak_load,
    throughput_sa,
    throughput_series,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
