"""Command-line front end: ``solve``, ``simulate``, ``sweep`` and ``compare``.

Exit codes are 0 on success, 1 for usage or configuration errors and 2 when a
solve or run fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .breaching import defender_target_time, intruder_target_time, solve_breaching
from .dynamics import IdealDynamics, SecondOrderDynamics
from .engine import GameConfig, fmt, result_json, run_game, trajectory_csv
from .exceptions import ConfigError, GeometryError, HemiDefenseError
from .experiments import (
    compare_spec_from_dict,
    run_comparison,
    run_sweep,
    spec_to_dict,
    sweep_spec_from_dict,
    with_dynamics,
)
from .geometry import IntruderPose, RelativeState

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2

logger = logging.getLogger("hemidefense")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    seed: int
    config: dict[str, Any]
    files: list[str] = field(default_factory=list)
    duration_s: float = 0.0
    version: str = __version__

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        data = {
            "tool": "hemidefense",
            "version": self.version,
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "files": sorted(self.files + ["manifest.json"]),
            "duration_s": self.duration_s,
        }
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return path


def _load_json(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _dynamics(name: str | None):
    if name is None:
        return None
    return IdealDynamics() if name == "ideal" else SecondOrderDynamics()


def _out_dir(args, command: str, seed: int) -> Path:
    if args.out is not None:
        out = Path(args.out)
    else:
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        out = Path("runs") / f"{command}-seed{seed}-{stamp}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(out: Path, name: str, text: str, files: list[str]) -> None:
    (out / name).write_text(text)
    files.append(name)


def cmd_solve(args) -> int:
    phi = args.phi if args.phi_pi is None else args.phi_pi * math.pi
    try:
        z = RelativeState(args.psi, phi, args.r, args.radius, args.nu)
        if z.r < z.R:
            raise GeometryError(f"intruder inside the perimeter (r={z.r} < R={z.R})")
    except (GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        sol = solve_breaching(z, args.psi_d)
    except HemiDefenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for name in ("residual_beta", "residual_theta"):
            if hasattr(exc, name):
                print(f"  {name}: {fmt(getattr(exc, name))}", file=sys.stderr)
        return EXIT_FAILURE
    tau_D = defender_target_time(z, sol.theta_rel)
    tau_A = intruder_target_time(IntruderPose(args.psi_d + z.psi, z.r), sol.theta_abs, z.R, z.nu)
    rec = {
        "theta_rel": sol.theta_rel,
        "theta_abs": sol.theta_abs,
        "beta_star": sol.beta_star,
        "B": [float(c) for c in sol.point_B],
        "tau_D": tau_D,
        "tau_A": tau_A,
        "p": tau_D - tau_A,
        "residual_beta": sol.residual_beta,
        "residual_theta": sol.residual_theta,
        "iterations": sol.iterations,
        "method": sol.method,
    }
    if args.json:
        print(json.dumps(rec, indent=2))
    else:
        for k, v in rec.items():
            text = " ".join(fmt(c) for c in v) if isinstance(v, list) else fmt(v)
            print(f"{k}: {text}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    data = _load_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = GameConfig.from_dict(data)
    model = _dynamics(args.dynamics)
    if model is not None:
        cfg = with_dynamics(cfg, model)
    out = _out_dir(args, "simulate", cfg.seed)
    started = time.perf_counter()
    try:
        result = run_game(cfg)
    except HemiDefenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    files: list[str] = []
    _write(out, "trajectory.csv", trajectory_csv(result), files)
    _write(out, "result.json", result_json(result, cfg) + "\n", files)
    _write(out, "config.json", json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", files)
    RunManifest("simulate", cfg.seed, cfg.to_dict(), files, time.perf_counter() - started).write(out)
    metric = (f"l_d={fmt(result.l_d)}" if result.l_d is not None
              else f"l_s={fmt(result.l_s)}" if result.l_s is not None else "no metric")
    print(f"winner={result.winner} t_f={fmt(result.t_f)} ticks={result.tick_count} {metric}")
    print(f"output: {out}")
    return EXIT_OK


def _finish_experiment(args, command, spec, result, started) -> int:
    out = _out_dir(args, command, spec.seed)
    files: list[str] = []
    _write(out, f"{command}.csv", result.to_csv(), files)
    _write(out, "summary.csv", result.summary_csv(), files)
    echo = spec_to_dict(spec)
    _write(out, "config.json", json.dumps(echo, indent=2, sort_keys=True) + "\n", files)
    RunManifest(command, spec.seed, echo, files, time.perf_counter() - started).write(out)
    failed = sum(r.winner == "failed" for r in result.runs)
    print(f"{len(result.runs)} runs, {failed} failed; output: {out}")
    for row in result.summary:
        print(f"  {row.group:>24} {row.metric} mean={fmt(row.mean)} std={fmt(row.std)} n={row.n}")
    return EXIT_FAILURE if failed == len(result.runs) else EXIT_OK


def cmd_sweep(args) -> int:
    data = _load_json(args.config)
    for key, val in (("seed", args.seed), ("step_scaling", args.step_scaling), ("trials_per_radius", args.trials)):
        if val is not None:
            data[key] = val
    if args.radii is not None:
        data["radii"] = args.radii
    spec = sweep_spec_from_dict(data)
    model = _dynamics(args.dynamics)
    if model is not None:
        spec = dataclasses.replace(spec, base_config=with_dynamics(spec.base_config, model))
    started = time.perf_counter()
    return _finish_experiment(args, "sweep", spec, run_sweep(spec, jobs=args.jobs), started)


def cmd_compare(args) -> int:
    data = _load_json(args.config)
    for key, val in (("seed", args.seed), ("n_trials", args.trials)):
        if val is not None:
            data[key] = val
    spec = compare_spec_from_dict(data)
    base = spec.base_config
    model = _dynamics(args.dynamics)
    if model is not None:
        base = with_dynamics(base, model, args.dynamics_agents)
    landing = args.landing_tol
    if landing is None and isinstance(model, SecondOrderDynamics):
        # a lagging defender rarely touches down within eps_ang of its aim; count any touchdown
        landing = math.pi
    if landing is not None:
        base = base.replace(eps_aim=landing)
    spec = dataclasses.replace(spec, base_config=base)
    started = time.perf_counter()
    return _finish_experiment(args, "compare", spec, run_comparison(spec, jobs=args.jobs), started)


def _radii(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hemidefense", description="Hemisphere perimeter defense game toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="optimal breaching point for one state")
    s.add_argument("--psi", type=float, required=True, help="intruder azimuth relative to the defender (rad)")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--phi", type=float, help="defender elevation (rad)")
    g.add_argument("--phi-pi", type=float, help="defender elevation in units of pi")
    s.add_argument("--r", type=float, required=True, help="intruder range")
    s.add_argument("--radius", type=float, default=1.0, help="hemisphere radius R")
    s.add_argument("--nu", type=float, default=1.0, help="speed ratio")
    s.add_argument("--psi-d", type=float, default=0.0, help="defender azimuth (world frame)")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    def common(sp, jobs=True):
        sp.add_argument("--config", help="JSON config file; unknown keys are rejected")
        sp.add_argument("--out", help="output directory (default runs/<command>-seed<N>-<timestamp>)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--dynamics", choices=["ideal", "second-order"])
        if jobs:
            sp.add_argument("--jobs", type=int, default=1)

    m = sub.add_parser("simulate", help="play one game and write its trajectory")
    common(m, jobs=False)
    m.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="radius sweep of l_d / R")
    common(w)
    w.add_argument("--step-scaling", choices=["fixed", "proportional"])
    w.add_argument("--trials", type=int, help="trials per radius")
    w.add_argument("--radii", type=_radii, help="comma-separated radii")
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="optimal vs baseline defender, paired trials")
    common(c)
    c.add_argument("--trials", type=int)
    c.add_argument("--dynamics-agents", choices=["both", "defender"], default="both")
    c.add_argument("--landing-tol", type=float,
                   help="azimuth tolerance (rad) for a touchdown to count as reaching the aim")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
