"""Statistical bounding tubes for continuous-time flows."""

from ._gotube import (
    BudgetExceededError,
    ConfigError,
    GoTubeError,
    IntegrationBlowupError,
    UnknownSystemError,
    audit,
    ball_volume,
    cap_fraction,
    cap_radius,
    certify_quantile,
    dkw_epsilon,
    fit_gev,
    flow,
    rhs,
    run,
    systems,
)

__all__ = [
    "BudgetExceededError",
    "ConfigError",
    "GoTubeError",
    "IntegrationBlowupError",
    "UnknownSystemError",
    "audit",
    "ball_volume",
    "cap_fraction",
    "cap_radius",
    "certify_quantile",
    "dkw_epsilon",
    "fit_gev",
    "flow",
    "rhs",
    "run",
    "systems",
]
