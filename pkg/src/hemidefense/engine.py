"""Single-game tick loop, termination rules and the terminal-distance metrics."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .breaching import payoff, solve_breaching
from .dynamics import (
    AgentState,
    DynamicsModel,
    IdealDynamics,
    SecondOrderDynamics,
    cruise_step,
    dynamics_from_dict,
    dynamics_to_dict,
    project_defender,
    step,
)
from .exceptions import ConfigError, GeometryError, HemiDefenseError, SimulationError
from .geometry import (
    DefenderPose,
    IntruderPose,
    Vec3,
    defender_from_cartesian,
    defender_to_cartesian,
    great_circle_distance,
    intruder_from_cartesian,
    intruder_to_cartesian,
    relative_state,
    wrap_angle,
)
from .strategies import (
    Agent,
    StepCommand,
    StrategyKind,
    defender_command,
    intruder_command,
    is_terminal,
)


class GameMode(str, enum.Enum):
    UNTIL_INTRUDER_ARRIVES = "until_intruder_arrives"
    UNTIL_DEFENDER_ARRIVES = "until_defender_arrives"
    FIRST_ARRIVAL = "first_arrival"


class Status(str, enum.Enum):
    CONTINUE = "continue"
    INTRUDER_WIN = "intruder_win"
    DEFENDER_WIN = "defender_win"


@dataclass(frozen=True)
class GameConfig:
    """Complete specification of one game.

    ``r0``, ``eps_r``, ``eps_aim`` and ``max_ticks`` default to ``2R``, ``1e-3 R``,
    ``eps_ang`` and enough ticks for the intruder to travel ``20 R`` at its cruise
    step (``ceil(20 R / dl_prime)`` under ideal dynamics). The defaults otherwise reproduce the radius-sweep
    setup: intruder-win game from ``[0.9, 0.3 pi, 2R]`` with ``dl = dl' = 0.72``.
    """

    R: float = 10.0
    nu: float = 1.0
    dl: float = 0.72
    dl_prime: float = 0.72
    dt: float = 0.07
    psi0: float = 0.9
    phi0: float = 0.3 * math.pi
    r0: float | None = None
    psi_D0: float = 0.0
    defender_strategy: StrategyKind = StrategyKind.OPTIMAL_DEFENDER
    dynamics_defender: DynamicsModel = field(default_factory=IdealDynamics)
    dynamics_intruder: DynamicsModel = field(default_factory=IdealDynamics)
    mode: GameMode = GameMode.UNTIL_INTRUDER_ARRIVES
    eps_r: float | None = None
    eps_ang: float = 1e-3
    eps_aim: float | None = None
    max_ticks: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "defender_strategy", StrategyKind(self.defender_strategy))
        object.__setattr__(self, "mode", GameMode(self.mode))
        self.validate()

    @property
    def initial_range(self) -> float:
        return 2.0 * self.R if self.r0 is None else self.r0

    @property
    def radial_tol(self) -> float:
        return 1e-3 * self.R if self.eps_r is None else self.eps_r

    @property
    def aim_tol(self) -> float:
        return self.eps_ang if self.eps_aim is None else self.eps_aim

    @property
    def tick_limit(self) -> int:
        if self.max_ticks is not None:
            return int(self.max_ticks)
        return math.ceil(20.0 * self.R / cruise_step(self.dynamics_intruder, self.dl_prime, self.dt))

    def validate(self) -> None:
        def bad(msg):
            raise ConfigError(msg)

        if not self.R > 0:
            bad(f"R: must be positive, got {self.R}")
        if not 0 < self.nu <= 1:
            bad(f"nu: must lie in (0, 1], got {self.nu}")
        if not 0 < self.dl < 2 * self.R:
            bad(f"dl: must lie in (0, 2R), got {self.dl}")
        if not self.dl_prime > 0:
            bad(f"dl_prime: must be positive, got {self.dl_prime}")
        if not self.dt > 0:
            bad(f"dt: must be positive, got {self.dt}")
        if not 0 <= self.phi0 <= math.pi / 2:
            bad(f"phi0: must lie in [0, pi/2], got {self.phi0}")
        if not self.initial_range > self.R:
            bad(f"r0: must exceed R={self.R}, got {self.r0}")
        if not (self.radial_tol > 0 and self.eps_ang > 0 and self.aim_tol > 0):
            bad("eps_r, eps_ang, eps_aim: must be positive")
        if not self.tick_limit > 0:
            bad(f"max_ticks: must be positive, got {self.max_ticks}")
        if self.defender_strategy is StrategyKind.OPTIMAL_INTRUDER:
            bad("defender_strategy: optimal_intruder does not command the defender")

    def replace(self, **changes) -> "GameConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["defender_strategy"] = self.defender_strategy.value
        d["mode"] = self.mode.value
        d["dynamics_defender"] = dynamics_to_dict(self.dynamics_defender)
        d["dynamics_intruder"] = dynamics_to_dict(self.dynamics_intruder)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GameConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        for key in ("dynamics_defender", "dynamics_intruder"):
            if key in d and isinstance(d[key], dict):
                try:
                    d[key] = dynamics_from_dict(d[key])
                except (TypeError, ConfigError) as exc:
                    raise ConfigError(f"{key}: {exc}") from None
        try:
            return cls(**d)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class TrajectorySample:
    tick: int
    t: float
    defender_pos: Vec3 = field(repr=False)
    intruder_pos: Vec3 = field(repr=False)
    theta_abs: float
    beta_star: float
    payoff: float


@dataclass
class GameResult:
    winner: str
    t_f: float
    tick_count: int
    final_defender: Vec3 = field(repr=False)
    final_intruder: Vec3 = field(repr=False)
    trajectory: list[TrajectorySample] = field(repr=False, default_factory=list)
    l_d: float | None = None
    l_s: float | None = None
    R: float = 1.0
    initial_payoff: float = math.nan

    @property
    def l_d_over_R(self) -> float | None:
        return None if self.l_d is None else self.l_d / self.R

    @property
    def l_s_over_R(self) -> float | None:
        return None if self.l_s is None else self.l_s / self.R

    def record(self, config: GameConfig | None = None) -> dict[str, Any]:
        out = {
            "winner": self.winner,
            "t_f": self.t_f,
            "tick_count": self.tick_count,
            "l_d": self.l_d,
            "l_d_over_R": self.l_d_over_R,
            "l_s": self.l_s,
            "l_s_over_R": self.l_s_over_R,
            "initial_payoff": self.initial_payoff,
        }
        if config is not None:
            out["config"] = config.to_dict()
        return out


TRAJECTORY_FIELDS = [
    "tick", "t", "def_x", "def_y", "def_z", "int_x", "int_y", "int_z", "theta_abs", "beta_star", "payoff",
]


def fmt(x) -> str:
    """Full-precision text form used by every CSV writer."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def trajectory_csv(result: GameResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_FIELDS)
    for s in result.trajectory:
        w.writerow(
            [fmt(s.tick), fmt(s.t), *(fmt(c) for c in s.defender_pos), *(fmt(c) for c in s.intruder_pos),
             fmt(s.theta_abs), fmt(s.beta_star), fmt(s.payoff)]
        )
    return buf.getvalue()


def result_json(result: GameResult, config: GameConfig | None = None) -> str:
    return json.dumps(result.record(config), indent=2, sort_keys=True)


def check_termination(
    d: DefenderPose, a: IntruderPose, cfg: GameConfig, target_azimuth: float | None = None
) -> Status:
    """Win test with tolerances ``eps_r`` (radial) and ``eps_ang`` (angular).

    The defender wins on the base circle under the intruder's azimuth, or within
    ``eps_aim`` of ``target_azimuth``, the base point its own strategy was
    heading for. ``until_intruder_arrives`` disables the defender's win and
    ``until_defender_arrives`` the intruder's; ``first_arrival`` keeps both.
    """
    psi = abs(wrap_angle(a.psi_A - d.psi_D))
    arrived = a.r <= cfg.R + cfg.radial_tol
    if cfg.mode is not GameMode.UNTIL_DEFENDER_ARRIVES and arrived and psi + d.phi_D > cfg.eps_ang:
        return Status.INTRUDER_WIN
    if cfg.mode is not GameMode.UNTIL_INTRUDER_ARRIVES and not arrived and d.phi_D <= cfg.eps_ang:
        if psi <= cfg.eps_ang:
            return Status.DEFENDER_WIN
        if target_azimuth is not None and abs(wrap_angle(target_azimuth - d.psi_D)) <= cfg.aim_tol:
            return Status.DEFENDER_WIN
    return Status.CONTINUE


def metric_l_d(final_defender: Vec3, final_intruder: Vec3, R: float, eps_r: float | None = None) -> float:
    """Surface geodesic between the defender and the intruder's perimeter point."""
    eps_r = 1e-3 * R if eps_r is None else eps_r
    A = np.asarray(final_intruder, dtype=float)
    rho = math.hypot(A[0], A[1])
    if abs(rho - R) > eps_r or abs(A[2]) > eps_r:
        raise GeometryError(f"intruder is not on the perimeter (r={rho}, R={R})")
    D = np.asarray(final_defender, dtype=float)
    if abs(float(np.linalg.norm(D)) - R) > eps_r:
        raise GeometryError("defender is not on the hemisphere")
    A_base = np.array([A[0] * R / rho, A[1] * R / rho, 0.0])
    return great_circle_distance(project_defender(D, R), A_base, R)


def metric_l_s(final_defender: Vec3, final_intruder: Vec3, eps_ang: float = 1e-3) -> float:
    """Straight-line separation once the defender is down on the base circle."""
    D = np.asarray(final_defender, dtype=float)
    n = float(np.linalg.norm(D))
    if n == 0 or math.asin(min(1.0, max(0.0, D[2] / n))) > eps_ang:
        raise GeometryError("defender has not reached the base circle")
    return float(np.linalg.norm(D - np.asarray(final_intruder, dtype=float)))


def _resolve(model: DynamicsModel, step_length: float, dt: float) -> DynamicsModel:
    if isinstance(model, SecondOrderDynamics) and model.max_speed is None:
        return dataclasses.replace(model, max_speed=step_length / dt)
    return model


def _poses(dstate: AgentState, istate: AgentState, R: float, psi_hint: float):
    return defender_from_cartesian(dstate.position, R, psi_hint), intruder_from_cartesian(istate.position)


def run_game(cfg: GameConfig, record_trajectory: bool = True) -> GameResult:
    """Play one game to termination or ``max_ticks``.

    Both commands of a tick are computed from the same snapshot and share one
    breaching-point solution.

    Raises
    ------
    SimulationError
        If the solver fails mid-game; carries the tick index.
    """
    R = cfg.R
    dyn_d = _resolve(cfg.dynamics_defender, cfg.dl, cfg.dt)
    dyn_i = _resolve(cfg.dynamics_intruder, cfg.dl_prime, cfg.dt)
    d0 = DefenderPose(cfg.psi_D0, cfg.phi0, R)
    a0 = IntruderPose(cfg.psi_D0 + cfg.psi0, cfg.initial_range)
    dstate = AgentState.at_rest(Agent.DEFENDER, defender_to_cartesian(d0), R, dyn_d)
    istate = AgentState.at_rest(Agent.INTRUDER, intruder_to_cartesian(a0), R, dyn_i)

    trajectory: list[TrajectorySample] = []
    d, a = d0, a0
    aim = math.nan
    prev = None
    tick = 0
    initial_payoff = math.nan
    status = check_termination(d, a, cfg)

    def sample(sol):
        if not record_trajectory:
            return
        if sol is None:
            th = be = pv = math.nan
        else:
            th, be = sol.theta_abs, sol.beta_star
            pv = payoff(relative_state(d, a, cfg.nu), d, a, sol).p
        trajectory.append(
            TrajectorySample(tick, tick * cfg.dt, dstate.position.copy(), istate.position.copy(), th, be, pv)
        )

    def try_solve():
        try:
            return solve_breaching(relative_state(d, a, cfg.nu), d.psi_D)
        except HemiDefenseError:
            return None

    while True:
        if status is not Status.CONTINUE or tick >= cfg.tick_limit:
            sample(try_solve())
            break
        if is_terminal(d, a):
            # defender sits under the intruder on the base circle; nothing left to solve
            sol = dcmd = icmd = None
        else:
            warm = None if prev is None else prev.theta_abs - d.psi_D
            try:
                sol = solve_breaching(relative_state(d, a, cfg.nu), d.psi_D, theta0=warm)
            except HemiDefenseError as exc:
                raise SimulationError(str(exc), tick) from exc
            if tick == 0:
                initial_payoff = payoff(relative_state(d, a, cfg.nu), d, a, sol).p
            dcmd = defender_command(cfg.defender_strategy, d, a, cfg.nu, cfg.dl, sol)
            icmd = intruder_command(d, a, cfg.nu, cfg.dl_prime, sol)
        sample(sol)
        prev = sol if sol is not None else prev
        if dcmd is None:
            dcmd = StepCommand.hold(dstate.position, Agent.DEFENDER, aim)
        if icmd is None:
            icmd = StepCommand.hold(istate.position, Agent.INTRUDER)
        aim = dcmd.aim

        dstate = step(dstate, dcmd, dyn_d, cfg.dt)
        istate = step(istate, icmd, dyn_i, cfg.dt)
        rho = math.hypot(istate.position[0], istate.position[1])
        if rho < R:
            # never penetrate the perimeter
            p = istate.position * (R / rho)
            istate = dataclasses.replace(istate, position=p, velocity=np.zeros(3))
        tick += 1
        d, a = _poses(dstate, istate, R, d.psi_D)
        status = check_termination(d, a, cfg, aim)

    if status is Status.INTRUDER_WIN:
        winner = "intruder"
    elif status is Status.DEFENDER_WIN:
        winner = "defender"
    else:
        winner = "timeout"
    result = GameResult(
        winner=winner,
        t_f=tick * cfg.dt,
        tick_count=tick,
        final_defender=dstate.position.copy(),
        final_intruder=istate.position.copy(),
        trajectory=trajectory,
        R=R,
        initial_payoff=initial_payoff,
    )
    if winner == "intruder":
        result.l_d = metric_l_d(dstate.position, istate.position, R, cfg.radial_tol)
    elif winner == "defender":
        result.l_s = metric_l_s(dstate.position, istate.position, cfg.eps_ang)
    return result
