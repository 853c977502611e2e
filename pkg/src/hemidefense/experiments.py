"""Radius sweep and optimal-vs-baseline comparison, with seeded trials and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .dynamics import DynamicsModel, dynamics_from_dict
from .engine import GameConfig, GameMode, fmt, run_game
from .exceptions import ConfigError, HemiDefenseError
from .strategies import StrategyKind

logger = logging.getLogger(__name__)

SWEEP_FIELDS = ["radius", "trial", "winner", "t_f", "ticks", "l_d", "l_d_over_R"]
COMPARE_FIELDS = ["trial", "strategy", "winner", "t_f", "l_s", "l_s_over_R", "psi0", "phi0", "r0"]
SUMMARY_FIELDS = ["group", "metric", "mean", "std", "min", "max", "n"]


def default_radii(n: int = 22, lo: float = 3.0, hi: float = 300.0) -> list[float]:
    return [float(r) for r in np.geomspace(lo, hi, n)]


def comparison_base_config() -> GameConfig:
    """Defender-win setup: ``dl = 1.36``, ``dl' = 0.36``, ``nu = 1``."""
    return GameConfig(dl=1.36, dl_prime=0.36, nu=1.0, mode=GameMode.UNTIL_DEFENDER_ARRIVES)


@dataclass(frozen=True)
class SweepSpec:
    radii: Sequence[float] = field(default_factory=default_radii)
    trials_per_radius: int = 5
    base_config: GameConfig = field(default_factory=GameConfig)
    step_scaling: str = "fixed"
    jitter: float = 0.02
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ConfigError("radii: must be a non-empty list of positive values")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ConfigError("radii: must be strictly ascending")
        if self.trials_per_radius < 1:
            raise ConfigError("trials_per_radius: must be at least 1")
        if self.step_scaling not in ("fixed", "proportional"):
            raise ConfigError(f"step_scaling: expected 'fixed' or 'proportional', got {self.step_scaling!r}")
        if self.jitter < 0:
            raise ConfigError("jitter: must be non-negative")


@dataclass(frozen=True)
class CompareSpec:
    n_trials: int = 7
    psi0_range: tuple[float, float] = (0.3, 1.5)
    phi0_range: tuple[float, float] = (0.15 * math.pi, 0.45 * math.pi)
    r0_range: tuple[float, float] = (1.5, 3.0)
    base_config: GameConfig = field(default_factory=comparison_base_config)
    seed: int = 0

    def __post_init__(self):
        for name in ("psi0_range", "phi0_range", "r0_range"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.n_trials < 1:
            raise ConfigError("n_trials: must be at least 1")
        if not self.r0_range[0] > 1.0:
            raise ConfigError("r0_range: lower bound (in units of R) must exceed 1")
        lo, hi = self.phi0_range
        if not 0 <= lo <= hi <= math.pi / 2:
            raise ConfigError("phi0_range: must lie within [0, pi/2]")


@dataclass(frozen=True)
class SummaryRow:
    group: str
    metric: str
    mean: float
    std: float
    min: float
    max: float
    values: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @classmethod
    def from_values(cls, group: str, metric: str, values: Iterable[float]) -> "SummaryRow":
        v = np.array([x for x in values if x is not None and not math.isnan(x)], dtype=float)
        if v.size == 0:
            return cls(group, metric, math.nan, math.nan, math.nan, math.nan, ())
        std = float(v.std(ddof=1)) if v.size > 1 else 0.0
        return cls(group, metric, float(v.mean()), std, float(v.min()), float(v.max()), tuple(float(x) for x in v))


@dataclass(frozen=True)
class RunRecord:
    key: tuple
    config: GameConfig
    winner: str
    t_f: float | None
    ticks: int | None
    l_d: float | None
    l_s: float | None
    error: str | None = None

    def over_R(self, value: float | None) -> float | None:
        return None if value is None else value / self.config.R


def _play(item: tuple[tuple, GameConfig]) -> RunRecord:
    key, cfg = item
    try:
        res = run_game(cfg, record_trajectory=False)
    except HemiDefenseError as exc:
        logger.warning("run %s failed: %s", key, exc)
        return RunRecord(key, cfg, "failed", None, None, None, None, str(exc))
    return RunRecord(key, cfg, res.winner, res.t_f, res.tick_count, res.l_d, res.l_s)


def _run_all(items: list[tuple[tuple, GameConfig]], jobs: int = 1) -> list[RunRecord]:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_play, items, chunksize=1))
    else:
        records = [_play(it) for it in items]
    return sorted(records, key=lambda r: r.key)


def _write_csv(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    return _write_csv(SUMMARY_FIELDS, ([r.group, r.metric, r.mean, r.std, r.min, r.max, r.n] for r in rows))


def sweep_configs(spec: SweepSpec) -> list[tuple[tuple, GameConfig]]:
    """One config per (radius, trial).

    Trial 0 is the nominal start; trial ``j > 0`` shifts ``psi0`` by a seeded
    uniform offset in ``[-jitter, jitter]`` shared by all radii, so radii are
    compared on identical starts.
    """
    base = spec.base_config
    rng = np.random.default_rng(spec.seed)
    offsets = [0.0] + [float(x) for x in rng.uniform(-spec.jitter, spec.jitter, spec.trials_per_radius - 1)]
    items = []
    for R in spec.radii:
        k = R / base.R
        changes: dict[str, Any] = {"R": R}
        if spec.step_scaling == "proportional":
            changes.update(dl=base.dl * k, dl_prime=base.dl_prime * k)
        for name in ("r0", "eps_r"):
            if getattr(base, name) is not None:
                changes[name] = getattr(base, name) * k
        for j, off in enumerate(offsets):
            items.append(((R, j), base.replace(psi0=base.psi0 + off, seed=spec.seed, **changes)))
    return items


@dataclass
class SweepResult:
    runs: list[RunRecord]
    summary: list[SummaryRow]

    def to_csv(self) -> str:
        return _write_csv(
            SWEEP_FIELDS,
            ([r.key[0], r.key[1], r.winner, r.t_f, r.ticks, r.l_d, r.over_R(r.l_d)] for r in self.runs),
        )

    def summary_csv(self) -> str:
        return summary_csv(self.summary)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Play every (radius, trial) game and aggregate ``l_d / R`` per radius."""
    runs = _run_all(sweep_configs(spec), jobs)
    summary = []
    for R in spec.radii:
        vals = [r.over_R(r.l_d) for r in runs if r.key[0] == R]
        summary.append(SummaryRow.from_values(fmt(R), "l_d_over_R", vals))
    return SweepResult(runs, summary)


def generate_trials(spec: CompareSpec) -> list[GameConfig]:
    """Seeded initial states: ``psi0``, ``phi0`` uniform in their ranges, ``r0`` uniform in ``R * r0_range``."""
    rng = np.random.default_rng(spec.seed)
    base = spec.base_config
    out = []
    for _ in range(spec.n_trials):
        psi0 = float(rng.uniform(*spec.psi0_range))
        phi0 = float(rng.uniform(*spec.phi0_range))
        r0 = float(rng.uniform(*spec.r0_range)) * base.R
        out.append(base.replace(psi0=psi0, phi0=phi0, r0=r0, seed=spec.seed))
    return out


STRATEGIES = (StrategyKind.OPTIMAL_DEFENDER, StrategyKind.BASELINE_DEFENDER)


@dataclass
class CompareResult:
    runs: list[RunRecord]
    summary: list[SummaryRow]

    def pairs(self) -> list[tuple[RunRecord, RunRecord]]:
        by_trial: dict[int, dict[str, RunRecord]] = {}
        for r in self.runs:
            by_trial.setdefault(r.key[0], {})[r.key[1]] = r
        return [(v[STRATEGIES[0].value], v[STRATEGIES[1].value]) for _, v in sorted(by_trial.items())]

    def flagged(self) -> list[int]:
        """Trials in which the baseline ended with the larger ``l_s``."""
        out = []
        for opt, base in self.pairs():
            if opt.l_s is not None and base.l_s is not None and base.l_s > opt.l_s:
                out.append(opt.key[0])
        return out

    def to_csv(self) -> str:
        return _write_csv(
            COMPARE_FIELDS,
            (
                [r.key[0], r.key[1], r.winner, r.t_f, r.l_s, r.over_R(r.l_s), r.config.psi0, r.config.phi0,
                 r.config.initial_range]
                for r in self.runs
            ),
        )

    def summary_csv(self) -> str:
        return summary_csv(self.summary)


def run_comparison(spec: CompareSpec, jobs: int = 1) -> CompareResult:
    """Play each seeded trial once per defender strategy against the optimal intruder."""
    if spec.base_config.mode is not GameMode.UNTIL_DEFENDER_ARRIVES:
        raise ConfigError("base_config.mode: comparison requires until_defender_arrives")
    items = []
    for i, cfg in enumerate(generate_trials(spec)):
        for kind in STRATEGIES:
            items.append(((i, kind.value), cfg.replace(defender_strategy=kind)))
    runs = _run_all(items, jobs)
    summary = []
    for kind in STRATEGIES:
        vals = [r.over_R(r.l_s) for r in runs if r.key[1] == kind.value]
        summary.append(SummaryRow.from_values(kind.value, "l_s_over_R", vals))
    result = CompareResult(runs, summary)
    for t in result.flagged():
        logger.info("trial %d: baseline strategy ended with the larger l_s", t)
    return result


def _spec_from_dict(cls, d: dict[str, Any], base_factory: Callable[[], GameConfig]):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    d = dict(d)
    if "base_config" in d:
        base = base_factory().to_dict()
        overrides = d["base_config"]
        unknown = set(overrides) - set(base)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base.update(overrides)
        d["base_config"] = GameConfig.from_dict(base)
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def sweep_spec_from_dict(d: dict[str, Any]) -> SweepSpec:
    return _spec_from_dict(SweepSpec, d, GameConfig)


def compare_spec_from_dict(d: dict[str, Any]) -> CompareSpec:
    return _spec_from_dict(CompareSpec, d, comparison_base_config)


def spec_to_dict(spec: SweepSpec | CompareSpec) -> dict[str, Any]:
    out = {}
    for f in dataclasses.fields(spec):
        v = getattr(spec, f.name)
        out[f.name] = v.to_dict() if isinstance(v, GameConfig) else (list(v) if isinstance(v, tuple) else v)
    return out


def with_dynamics(base: GameConfig, dynamics: DynamicsModel | dict, agents: str = "both") -> GameConfig:
    """Copy of ``base`` with the given dynamics on the defender or on both agents."""
    model = dynamics_from_dict(dynamics) if isinstance(dynamics, dict) else dynamics
    if agents == "defender":
        return base.replace(dynamics_defender=model)
    if agents == "both":
        return base.replace(dynamics_defender=model, dynamics_intruder=model)
    raise ConfigError(f"agents: expected 'both' or 'defender', got {agents!r}")
