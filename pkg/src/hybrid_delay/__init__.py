"""Delay analysis and simulation of a hybrid WiFi/VLC downlink."""

from .analytic import (
    AggApproxSolution,
    Branch,
    NonAggSolution,
    agg_analytic_lower_bound,
    agg_per_queue_mean_delays,
    agg_split_ratio_approx,
    mm1_mean_delay,
    nonagg_bruteforce_min,
    nonagg_mean_delay,
    nonagg_optimal_alpha,
)
from .model import (
    AllocationRatio,
    CapacityOrderViolation,
    InfeasibleLoad,
    ModelError,
    NonPositiveParameter,
    SystemParams,
    UnstableQueue,
    ValidationError,
    feasible_alpha_interval,
    validate_params,
)
from .sim import (
    DelayStats,
    RunConfig,
    generate_workload,
    lindley_fifo_delays,
    optimize_alpha_simulated,
    simulate_aggregated,
    simulate_nonaggregated,
)

__version__ = "0.1.0"
