"""Numerical laboratory for random walks excited by their recent history.

Exact finite-window speeds, an independent Markov-chain oracle, large-window
limits with tie resolution, the continuum jump-response model, and a
reproducible Monte Carlo engine.
"""

from .asymptotics import (
    GLimitReport,
    GSpec,
    JValue,
    LimitSpec,
    TieReport,
    WindowSumCheck,
    binomial_window_sum,
    g_limit_speed,
    g_potential,
    j_values,
    limit_speed_multi,
    limit_speed_single,
    limit_speed_single_boundary,
    r_star,
    rate_function,
)
from .chain import (
    FullStationary,
    LevelMeasure,
    ergodic_speed,
    expand_levels,
    level_weights,
    stationarity_residual,
    stationary_bruteforce,
    transition_successors,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    ExwalkError,
    NeedsOffsetsError,
    QuadratureError,
    TieError,
    UnsupportedRefinementError,
    ValidationError,
)
from .exact import (
    SpeedBreakdown,
    speed_consecutive_oracle,
    speed_g,
    speed_multi,
    speed_multi_rational,
    speed_single,
)
from .model import ThresholdLadder, WalkState, jump_probability, validate
from .simulate import (
    IncrementCensus,
    SimResult,
    estimate_speed,
    increment_census,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConvergenceError",
    "ExwalkError",
    "FullStationary",
    "GLimitReport",
    "GSpec",
    "IncrementCensus",
    "JValue",
    "LevelMeasure",
    "LimitSpec",
    "NeedsOffsetsError",
    "QuadratureError",
    "SimResult",
    "SpeedBreakdown",
    "ThresholdLadder",
    "TieError",
    "TieReport",
    "UnsupportedRefinementError",
    "ValidationError",
    "WalkState",
    "WindowSumCheck",
    "binomial_window_sum",
    "ergodic_speed",
    "estimate_speed",
    "expand_levels",
    "g_limit_speed",
    "g_potential",
    "increment_census",
    "j_values",
    "jump_probability",
    "level_weights",
    "limit_speed_multi",
    "limit_speed_single",
    "limit_speed_single_boundary",
    "r_star",
    "rate_function",
    "run",
    "speed_consecutive_oracle",
    "speed_g",
    "speed_multi",
    "speed_multi_rational",
    "speed_single",
    "stationarity_residual",
    "stationary_bruteforce",
    "transition_successors",
    "validate",
]
