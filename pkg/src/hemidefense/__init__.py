"""Hemisphere perimeter defense: optimal breaching point, game simulation and experiments."""

from .breaching import (
    BreachingSolution,
    Payoff,
    beta_of_theta,
    defender_target_time,
    intruder_target_time,
    payoff,
    solve_breaching,
    theta_of_beta,
)
from .dynamics import IdealDynamics, SecondOrderDynamics
from .engine import GameConfig, GameMode, GameResult, run_game
from .exceptions import (
    ConfigError,
    ConvergenceError,
    GeometryError,
    HemiDefenseError,
    SimulationError,
    SingularityError,
    StepError,
)
from .geometry import DefenderPose, IntruderPose, RelativeState, relative_state
from .strategies import StrategyKind, move_defender, move_intruder

__version__ = "0.1.0"

__all__ = [
    "BreachingSolution", "Payoff", "beta_of_theta", "theta_of_beta", "solve_breaching",
    "defender_target_time", "intruder_target_time", "payoff",
    "IdealDynamics", "SecondOrderDynamics",
    "GameConfig", "GameMode", "GameResult", "run_game",
    "HemiDefenseError", "GeometryError", "SingularityError", "ConvergenceError", "StepError",
    "SimulationError", "ConfigError",
    "DefenderPose", "IntruderPose", "RelativeState", "relative_state",
    "StrategyKind", "move_defender", "move_intruder",
]
