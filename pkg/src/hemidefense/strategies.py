"""Per-tick waypoint commands for the defender and the intruder.

Each tick an agent is sent toward the end of a short segment of its current
optimal path: a chord of length ``dl`` along the great circle from the defender
to the breaching point, or a segment of length ``dl_prime`` along the straight
line from the intruder to it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .breaching import SINGULAR_GUARD, BreachingSolution, solve_breaching
from .exceptions import SingularityError, StepError
from .geometry import (
    DefenderPose,
    IntruderPose,
    Vec3,
    breaching_point_cartesian,
    defender_to_cartesian,
    intruder_to_cartesian,
    relative_state,
    rotate_z,
    vec3,
)


class Agent(str, enum.Enum):
    DEFENDER = "defender"
    INTRUDER = "intruder"


class StrategyKind(str, enum.Enum):
    OPTIMAL_DEFENDER = "optimal_defender"
    BASELINE_DEFENDER = "baseline_defender"
    OPTIMAL_INTRUDER = "optimal_intruder"

    @property
    def agent(self) -> Agent:
        return Agent.INTRUDER if self is StrategyKind.OPTIMAL_INTRUDER else Agent.DEFENDER


@dataclass(frozen=True)
class StepCommand:
    """Position command for one tick.

    ``aim`` is the azimuth of the base-circle point the agent heads for; the
    engine's termination test reads it.
    """

    target: Vec3 = field(repr=False)
    step_length: float
    agent: Agent
    aim: float = math.nan

    @classmethod
    def hold(cls, position: Vec3, agent: Agent, aim: float = math.nan) -> "StepCommand":
        return cls(np.array(position, dtype=float), 0.0, agent, aim)


def move_defender(psi_D: float, phi_D: float, theta_abs: float, dl: float, R: float) -> Vec3:
    """Point reached by a chord step of length ``dl`` from the defender toward B.

    The step stays on the sphere and in the plane through the origin, the
    defender and the breaching point at azimuth ``theta_abs``.
    """
    if not 0.0 <= dl < 2.0 * R:
        raise StepError(f"step length {dl} must lie in [0, 2R) with R={R}")
    theta = theta_abs - psi_D
    sp, cp = math.sin(phi_D), math.cos(phi_D)
    st, ct = math.sin(theta), math.cos(theta)
    den = math.sqrt(st * st + (ct * sp) ** 2)
    if den < SINGULAR_GUARD:
        raise SingularityError("plane through origin, defender and breaching point is undefined")
    if dl == 0.0:
        return defender_to_cartesian(DefenderPose(psi_D, phi_D, R))
    T = math.sqrt(4.0 * R * R - dl * dl) / den
    k = dl / (2.0 * R)
    x = R * cp - k * dl * cp + k * sp * sp * ct * T
    y = k * st * T
    z = R * sp - k * dl * sp - k * sp * ct * cp * T
    return rotate_z(vec3(x, y, z), psi_D)


def _segment_step(A: Vec3, B: Vec3, length: float) -> Vec3:
    d = B - A
    dist = float(np.linalg.norm(d))
    if dist <= length:
        return np.array(B, dtype=float)
    return A + d * (length / dist)


def move_intruder(a: IntruderPose, theta_abs: float, dl_prime: float, R: float) -> Vec3:
    """Step of length ``dl_prime`` from the intruder straight toward B, never past B."""
    if dl_prime < 0:
        raise StepError(f"intruder step length must be non-negative, got {dl_prime}")
    return _segment_step(intruder_to_cartesian(a), breaching_point_cartesian(theta_abs, R), dl_prime)


def is_terminal(d: DefenderPose, a: IntruderPose) -> bool:
    """Defender on the base circle at the intruder's azimuth (strategy loop guard)."""
    psi = a.psi_A - d.psi_D
    return math.hypot(math.sin(psi), math.sin(d.phi_D)) < SINGULAR_GUARD and math.cos(psi) > 0


def defender_command(
    kind: StrategyKind,
    d: DefenderPose,
    a: IntruderPose,
    nu: float,
    dl: float,
    solution: BreachingSolution | None = None,
) -> StepCommand | None:
    """Next defender waypoint, or ``None`` once the game is over.

    The optimal defender heads for the optimal breaching point, the baseline
    defender for the base point at the intruder's azimuth. When the chord to
    that point is no longer than ``dl`` the command lands on it exactly.
    """
    if kind.agent is not Agent.DEFENDER:
        raise ValueError(f"{kind.value} does not command the defender")
    if is_terminal(d, a):
        return None
    if kind is StrategyKind.OPTIMAL_DEFENDER:
        if solution is None:
            solution = solve_breaching(relative_state(d, a, nu), d.psi_D)
        aim = solution.theta_abs
    else:
        aim = a.psi_A
    D = defender_to_cartesian(d)
    B = breaching_point_cartesian(aim, d.R)
    if float(np.linalg.norm(B - D)) <= dl:
        target = B
    else:
        target = move_defender(d.psi_D, d.phi_D, aim, dl, d.R)
    return StepCommand(target, dl, Agent.DEFENDER, aim)


def intruder_command(
    d: DefenderPose,
    a: IntruderPose,
    nu: float,
    dl_prime: float,
    solution: BreachingSolution | None = None,
) -> StepCommand | None:
    if is_terminal(d, a):
        return None
    if solution is None:
        solution = solve_breaching(relative_state(d, a, nu), d.psi_D)
    target = move_intruder(a, solution.theta_abs, dl_prime, d.R)
    return StepCommand(target, dl_prime, Agent.INTRUDER, solution.theta_abs)
