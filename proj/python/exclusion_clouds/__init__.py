"""Stable clouds of finite exclusion processes.

Thin re-export of the compiled core.  Particles and gaps use 1-based labels;
interval functions take ``(first, length)``.
"""

from ._core import (
    RNG_NAME,
    CloudReport,
    ConfigError,
    ConvergenceError,
    ModelError,
    RateSystem,
    TrafficSolution,
    __version__,
    alpha,
    analyze,
    beta,
    check_partition,
    clt_constants_two_particle,
    config_rates,
    expected_cloud_width,
    full_loads,
    golden_instances,
    hrho,
    hrho_all,
    hv,
    parse_config,
    partition_oracle,
    replica_displacements,
    simulate,
    solve_general_traffic,
    solve_stable_traffic,
    truncated_stationary,
    verify,
)

__all__ = [
    "RNG_NAME",
    "CloudReport",
    "ConfigError",
    "ConvergenceError",
    "ModelError",
    "RateSystem",
    "TrafficSolution",
    "__version__",
    "alpha",
    "analyze",
    "beta",
    "check_partition",
    "clt_constants_two_particle",
    "config_rates",
    "expected_cloud_width",
    "full_loads",
    "golden_instances",
    "hrho",
    "hrho_all",
    "hv",
    "parse_config",
    "partition_oracle",
    "replica_displacements",
    "simulate",
    "solve_general_traffic",
    "solve_stable_traffic",
    "truncated_stationary",
    "verify",
]
