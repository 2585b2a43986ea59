"""Bowen-metric counts, entropy rates and mean dimension estimates."""

from ._core import (
    BudgetError,
    ConfigError,
    Error,
    Measure,
    Point,
    PointSet,
    System,
    WindowError,
    brin_katok_entropy,
    config_hash,
    enumerate_points,
    grid_points,
    growth_rate,
    katok_entropy,
    mdim_estimate,
    reproduce_example,
    run_config,
    run_inequality_suite,
    separated_count,
    shapira_entropy,
    spanning_count,
)

__all__ = [
    "BudgetError",
    "ConfigError",
    "Error",
    "Measure",
    "Point",
    "PointSet",
    "System",
    "WindowError",
    "brin_katok_entropy",
    "config_hash",
    "enumerate_points",
    "grid_points",
    "growth_rate",
    "katok_entropy",
    "mdim_estimate",
    "reproduce_example",
    "run_config",
    "run_inequality_suite",
    "separated_count",
    "shapira_entropy",
    "spanning_count",
]
