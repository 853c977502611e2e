"""Turning waypoint commands into motion.

``IdealDynamics`` is the point-particle model: the agent lands on every
commanded waypoint within the tick. ``SecondOrderDynamics`` is a saturated
PD-tracked double integrator with a fixed command latency, a stand-in for a
multirotor whose controller needs time to build up speed and whose strategy
node acts on stale observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .exceptions import ConfigError, GeometryError
from .geometry import Vec3
from .strategies import Agent, StepCommand


@dataclass(frozen=True)
class IdealDynamics:
    kind: str = field(default="ideal", init=False)


@dataclass(frozen=True)
class SecondOrderDynamics:
    """Saturated PD tracking of the waypoint issued ``latency_ticks`` ago.

    Acceleration is ``gain_p * (target - x) - gain_d * v``, clipped to
    ``max_accel``. ``max_speed=None`` means the commanded speed, step length over tick.
    """

    max_accel: float = 2.0
    max_speed: float | None = None
    gain_p: float = 4.0
    gain_d: float = 4.0
    latency_ticks: int = 1
    kind: str = field(default="second_order", init=False)

    def __post_init__(self):
        if not self.max_accel > 0:
            raise ConfigError(f"max_accel must be positive, got {self.max_accel}")
        if self.max_speed is not None and not self.max_speed > 0:
            raise ConfigError(f"max_speed must be positive, got {self.max_speed}")
        if not (self.gain_p > 0 and self.gain_d > 0):
            raise ConfigError("PD gains must be positive")
        if int(self.latency_ticks) != self.latency_ticks or self.latency_ticks < 0:
            raise ConfigError(f"latency_ticks must be a non-negative integer, got {self.latency_ticks}")


DynamicsModel = Union[IdealDynamics, SecondOrderDynamics]


def dynamics_from_dict(d: dict) -> DynamicsModel:
    d = dict(d)
    kind = d.pop("kind", "ideal").replace("-", "_")
    if kind == "ideal":
        if d:
            raise ConfigError(f"unknown ideal dynamics keys: {sorted(d)}")
        return IdealDynamics()
    if kind == "second_order":
        allowed = {"max_accel", "max_speed", "gain_p", "gain_d", "latency_ticks"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown second_order dynamics keys: {sorted(unknown)}")
        return SecondOrderDynamics(**d)
    raise ConfigError(f"unknown dynamics kind {kind!r}")


def dynamics_to_dict(m: DynamicsModel) -> dict:
    if isinstance(m, IdealDynamics):
        return {"kind": "ideal"}
    return {
        "kind": "second_order",
        "max_accel": m.max_accel,
        "max_speed": m.max_speed,
        "gain_p": m.gain_p,
        "gain_d": m.gain_d,
        "latency_ticks": m.latency_ticks,
    }


@dataclass(frozen=True)
class AgentState:
    agent: Agent
    position: Vec3 = field(repr=False)
    velocity: Vec3 = field(repr=False)
    R: float
    pending: tuple[StepCommand, ...] = ()

    @classmethod
    def at_rest(cls, agent: Agent, position: Vec3, R: float, model: DynamicsModel) -> "AgentState":
        """Initial state; the latency queue is pre-filled with hold commands."""
        p = np.array(position, dtype=float)
        n = model.latency_ticks if isinstance(model, SecondOrderDynamics) else 0
        return cls(agent, p, np.zeros(3), R, tuple(StepCommand.hold(p, agent) for _ in range(n)))


def project_defender(p: Vec3, R: float) -> Vec3:
    p = np.array(p, dtype=float)
    n = float(np.linalg.norm(p))
    if n == 0.0:
        raise GeometryError("cannot project the origin onto the hemisphere")
    if p[2] < 0.0:
        p[2] = 0.0
        n = float(np.linalg.norm(p))
        if n == 0.0:
            raise GeometryError("cannot project a point below the origin onto the hemisphere")
    return p * (R / n)


def project_intruder(p: Vec3) -> Vec3:
    p = np.array(p, dtype=float)
    p[2] = 0.0
    return p


def _clip_norm(v: np.ndarray, limit: float) -> np.ndarray:
    n = float(np.linalg.norm(v))
    return v * (limit / n) if n > limit else v


def step(state: AgentState, cmd: StepCommand, model: DynamicsModel, dt: float) -> AgentState:
    """Advance one agent by one tick.

    Raises
    ------
    ValueError
        If ``dt`` is not positive or the command is addressed to the other agent.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if cmd.agent is not state.agent:
        raise ValueError(f"{cmd.agent.value} command sent to the {state.agent.value}")

    if isinstance(model, IdealDynamics):
        target = np.array(cmd.target, dtype=float)
        return replace(state, position=target, velocity=(target - state.position) / dt)

    queue = state.pending + (cmd,)
    active, pending = queue[0], queue[1:]
    max_speed = model.max_speed if model.max_speed is not None else active.step_length / dt

    accel = model.gain_p * (active.target - state.position) - model.gain_d * state.velocity
    accel = _clip_norm(accel, model.max_accel)
    vel = _clip_norm(state.velocity + accel * dt, max_speed)
    pos = state.position + vel * dt

    if state.agent is Agent.DEFENDER:
        pos = project_defender(pos, state.R)
        radial = pos / state.R
        vel = vel - float(np.dot(vel, radial)) * radial
    else:
        pos = project_intruder(pos)
        vel = project_intruder(vel)
    return AgentState(state.agent, pos, vel, state.R, pending)


def cruise_step(model: DynamicsModel, step_length: float, dt: float) -> float:
    """Steady per-tick displacement while chasing waypoints ``step_length`` ahead.

    Ideal agents cover the full step. Under PD tracking the waypoint error
    settles where ``kp * e = kd * v`` with ``e = step_length - latency * v * dt``.
    """
    if isinstance(model, IdealDynamics):
        return step_length
    v = step_length / (model.gain_d / model.gain_p + model.latency_ticks * dt)
    if model.max_speed is not None:
        v = min(v, model.max_speed)
    return min(v * dt, step_length)


def realized_speed(positions: np.ndarray, dt: float) -> np.ndarray:
    """Per-tick chord speed along a recorded trajectory."""
    positions = np.asarray(positions, dtype=float)
    return np.linalg.norm(np.diff(positions, axis=0), axis=1) / dt
