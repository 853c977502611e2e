"""Optimal breaching point: the two coupled governing equations and target times.

The approach angle as a function of the breaching angle is

    beta(theta) = acos(nu * cos(phi) * sin(theta) / sqrt(1 - cos(phi)^2 cos(theta)^2))

and the breaching angle as a function of the approach angle is

    theta(beta) = psi - beta + acos(R * cos(beta) / r)

Both are written in the defender-relative frame (defender azimuth = 0). The
optimal pair is the fixed point of their composition.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, GeometryError, SingularityError
from .geometry import (
    DefenderPose,
    IntruderPose,
    RelativeState,
    Vec3,
    breaching_point_cartesian,
    wrap_angle,
)

logger = logging.getLogger(__name__)

SINGULAR_GUARD = 1e-9
RESIDUAL_TOL = 1e-10
ILL_CONDITIONED_TOL = 1e-6


@dataclass(frozen=True)
class BreachingSolution:
    theta_rel: float
    theta_abs: float
    beta_star: float
    point_B: Vec3 = field(repr=False)
    iterations: int
    residual_beta: float
    residual_theta: float
    method: str = "fixed_point"


@dataclass(frozen=True)
class Payoff:
    tau_D: float
    tau_A: float
    p: float


def _clamp_unit(x: float) -> float:
    return 1.0 if x > 1.0 else (-1.0 if x < -1.0 else x)


def beta_of_theta(theta: float, phi_D: float, nu: float) -> float:
    """Approach angle implied by a breaching angle (defender-relative frame)."""
    cphi = math.cos(phi_D)
    # 1 - cos^2(phi) cos^2(theta), rearranged to avoid cancellation near the base point
    den = math.sqrt(math.sin(theta) ** 2 + (math.cos(theta) * math.sin(phi_D)) ** 2)
    if den < SINGULAR_GUARD:
        raise SingularityError(
            f"defender coincides with the breaching point (phi_D={phi_D:.3e}, theta={theta:.3e})"
        )
    return math.acos(_clamp_unit(nu * cphi * math.sin(theta) / den))


def theta_of_beta(beta: float, psi: float, r: float, R: float) -> float:
    """Breaching angle implied by an approach angle.

    Raises
    ------
    GeometryError
        If ``|R cos(beta)| > r``, i.e. the intruder is inside the circle the
        chord construction needs.
    """
    if not r > 0:
        raise GeometryError(f"intruder range must be positive, got {r}")
    arg = R * math.cos(beta) / r
    if abs(arg) > 1.0 + 1e-12:
        raise GeometryError(f"intruder at r={r} cannot see a breaching chord (R cos(beta)/r={arg:.6f})")
    return psi - beta + math.acos(_clamp_unit(arg))


def breaching_residual(theta: float, z: RelativeState) -> float:
    """``theta(beta(theta)) - theta``; zero exactly at the optimal breaching angle."""
    return theta_of_beta(beta_of_theta(theta, z.phi, z.nu), z.psi, z.r, z.R) - theta


def _residuals(theta: float, beta: float, z: RelativeState) -> tuple[float, float]:
    rb = abs(beta - beta_of_theta(theta, z.phi, z.nu))
    rt = abs(wrap_angle(theta - theta_of_beta(beta, z.psi, z.r, z.R)))
    return rb, rt


def _fixed_point(z: RelativeState, theta0: float, damping: float, tol: float, max_iter: int):
    theta = theta0
    for k in range(1, max_iter + 1):
        step = damping * breaching_residual(theta, z)
        theta += step
        if abs(step) < tol:
            return theta, k
    return None, max_iter


def _bracket_roots(z: RelativeState, n_scan: int) -> list[tuple[float, float, float, float]]:
    lo, hi = z.psi - math.pi, z.psi + math.pi
    inset = 1e-9
    grid = np.linspace(lo + inset, hi - inset, n_scan)
    vals = []
    for t in grid:
        try:
            vals.append(breaching_residual(float(t), z))
        except SingularityError:
            vals.append(math.nan)
    brackets = []
    for i in range(n_scan - 1):
        fa, fb = vals[i], vals[i + 1]
        if math.isnan(fa) or math.isnan(fb):
            continue
        if fa == 0.0:
            brackets.append((float(grid[i]), float(grid[i]), 0.0, 0.0))
        elif fa * fb < 0.0:
            brackets.append((float(grid[i]), float(grid[i + 1]), fa, fb))
    if vals[-1] == 0.0:
        brackets.append((float(grid[-1]), float(grid[-1]), 0.0, 0.0))
    return brackets


def _bisect(z: RelativeState, a: float, b: float, fa: float, max_iter: int = 200) -> tuple[float, int, bool]:
    """Returns the midpoint, the iteration count and whether the bracket hit float resolution."""
    k = 0
    for k in range(1, max_iter + 1):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            return m, k, True
        try:
            fm = breaching_residual(m, z)
        except SingularityError:
            return m, k, False
        if fm == 0.0:
            return m, k, True
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b), k, False


def count_sign_changes(z: RelativeState, n_scan: int = 1024) -> int:
    """Number of sign changes of the composed residual over ``(psi - pi, psi + pi)``."""
    return len(_bracket_roots(z, n_scan))


def solve_breaching(
    z: RelativeState,
    psi_D: float = 0.0,
    *,
    theta0: float | None = None,
    damping: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 200,
    n_scan: int = 1024,
) -> BreachingSolution:
    """Solve the governing equations for the optimal breaching and approach angles.

    A damped fixed-point iteration started at ``theta = psi`` is tried first; if it
    does not settle within ``max_iter`` steps (or wanders into the singular
    configuration), the composed residual is scanned on ``n_scan`` points over
    ``(psi - pi, psi + pi)`` and the bracketed root is bisected.

    Parameters
    ----------
    z : RelativeState
        Relative game state.
    psi_D : float
        Defender azimuth, used only to express the result in the world frame.
    theta0 : float, optional
        Starting breaching angle in the defender-relative frame (default ``psi``).
        Where several roots exist, the one reached from here is returned, so
        passing the previous solution keeps a game on one branch.

    Raises
    ------
    GeometryError
        If the intruder is inside the perimeter.
    SingularityError
        If the defender already sits on the base circle at the intruder's azimuth.
    ConvergenceError
        If neither scheme meets the residual tolerance.
    """
    if z.r < z.R:
        raise GeometryError(f"intruder inside the perimeter (r={z.r} < R={z.R})")
    if math.hypot(math.sin(z.psi), math.sin(z.phi)) < SINGULAR_GUARD and math.cos(z.psi) > 0:
        raise SingularityError("defender already on the base circle at the intruder azimuth")

    start = z.psi if theta0 is None else z.psi + wrap_angle(theta0 - z.psi)
    method = "fixed_point"
    try:
        theta, iters = _fixed_point(z, start, damping, tol, max_iter)
    except SingularityError:
        theta, iters = None, 0
    rb = rt = math.inf
    if theta is not None:
        beta = beta_of_theta(theta, z.phi, z.nu)
        rb, rt = _residuals(theta, beta, z)

    if theta is None or max(rb, rt) >= RESIDUAL_TOL:
        method = "bisection"
        brackets = _bracket_roots(z, n_scan)
        if len(brackets) > 1:
            logger.info("multiple sign changes (%d) of breaching residual at %s", len(brackets), z)
        # nearest to the fixed-point start first; skip jump discontinuities
        brackets.sort(key=lambda b: abs(0.5 * (b[0] + b[1]) - start))
        found = False
        for a, b, fa, _ in brackets:
            t, k, exact = (a, 0, True) if a == b else _bisect(z, a, b, fa)
            iters += k
            try:
                beta = beta_of_theta(t, z.phi, z.nu)
            except SingularityError:
                continue
            rb, rt = _residuals(t, beta, z)
            if max(rb, rt) < RESIDUAL_TOL:
                theta, found = t, True
                break
            if exact and max(rb, rt) < ILL_CONDITIONED_TOL:
                # residual slope ~ cot(phi): a float-exact bracket is the best attainable root
                theta, found, method = t, True, "bisection_ill_conditioned"
                break
        if not found:
            raise ConvergenceError(f"no root of the breaching residual found for {z}", rb, rt)

    theta_rel = wrap_angle(theta)
    theta_abs = wrap_angle(theta + psi_D)
    return BreachingSolution(
        theta_rel=theta_rel,
        theta_abs=theta_abs,
        beta_star=beta,
        point_B=breaching_point_cartesian(theta_abs, z.R),
        iterations=iters,
        residual_beta=rb,
        residual_theta=rt,
        method=method,
    )


def defender_target_time(z: RelativeState, theta_rel: float, speed: float = 1.0) -> float:
    """Great-circle travel time from the defender to the breaching point."""
    c = math.cos(z.phi) * math.cos(theta_rel)
    return z.R * math.acos(_clamp_unit(c)) / speed


def intruder_target_time(a: IntruderPose, theta_abs: float, R: float, nu: float) -> float:
    """Straight-line travel time from the intruder to the breaching point at speed ``nu``."""
    d2 = a.r * a.r + R * R - 2.0 * a.r * R * math.cos(a.psi_A - theta_abs)
    return math.sqrt(max(d2, 0.0)) / nu


def payoff(z: RelativeState, d: DefenderPose, a: IntruderPose, sol: BreachingSolution) -> Payoff:
    """Target-time difference ``tau_D - tau_A``; negative when the defender arrives first."""
    tau_D = defender_target_time(z, sol.theta_rel)
    tau_A = intruder_target_time(a, sol.theta_abs, z.R, z.nu)
    return Payoff(tau_D, tau_A, tau_D - tau_A)
