"""Coordinates, rotations and geodesics on the hemisphere of radius R.

Conventions: the defender lives on the upper hemisphere ``x^2 + y^2 + z^2 = R^2,
z >= 0``, the intruder on the ground plane ``z = 0``. Azimuths are measured from
the x-axis, elevations from the ground plane. Every angle returned by this
module is wrapped to ``(-pi, pi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import GeometryError

Vec3 = np.ndarray

TWO_PI = 2.0 * math.pi
SURFACE_TOL = 1e-6


def wrap_angle(angle: float) -> float:
    """Wrap an angle to ``(-pi, pi]``."""
    w = math.remainder(angle, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=float)


@dataclass(frozen=True)
class DefenderPose:
    psi_D: float
    phi_D: float
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise GeometryError(f"hemisphere radius must be positive, got {self.R}")
        if not -1e-12 <= self.phi_D <= math.pi / 2 + 1e-12:
            raise GeometryError(f"defender elevation {self.phi_D} outside [0, pi/2]")
        object.__setattr__(self, "psi_D", wrap_angle(self.psi_D))
        object.__setattr__(self, "phi_D", min(max(self.phi_D, 0.0), math.pi / 2))


@dataclass(frozen=True)
class IntruderPose:
    psi_A: float
    r: float

    def __post_init__(self):
        if not self.r >= 0:
            raise GeometryError(f"intruder range must be non-negative, got {self.r}")
        object.__setattr__(self, "psi_A", wrap_angle(self.psi_A))


@dataclass(frozen=True)
class RelativeState:
    """Game state ``[psi, phi, r]`` together with the radius and speed ratio."""

    psi: float
    phi: float
    r: float
    R: float
    nu: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise GeometryError(f"hemisphere radius must be positive, got {self.R}")
        if not 0.0 < self.nu <= 1.0:
            raise GeometryError(f"speed ratio nu must lie in (0, 1], got {self.nu}")
        if not -1e-12 <= self.phi <= math.pi / 2 + 1e-12:
            raise GeometryError(f"elevation {self.phi} outside [0, pi/2]")
        if not self.r >= 0:
            raise GeometryError(f"intruder range must be non-negative, got {self.r}")
        object.__setattr__(self, "psi", wrap_angle(self.psi))
        object.__setattr__(self, "phi", min(max(self.phi, 0.0), math.pi / 2))


def defender_to_cartesian(p: DefenderPose) -> Vec3:
    c = math.cos(p.phi_D)
    return vec3(p.R * c * math.cos(p.psi_D), p.R * c * math.sin(p.psi_D), p.R * math.sin(p.phi_D))


def intruder_to_cartesian(p: IntruderPose) -> Vec3:
    return vec3(p.r * math.cos(p.psi_A), p.r * math.sin(p.psi_A), 0.0)


def defender_from_cartesian(v: Vec3, R: float, psi_hint: float | None = None) -> DefenderPose:
    """Spherical pose of a point on (or projected onto) the hemisphere.

    At the apex the azimuth is undefined; ``psi_hint`` is returned there so a
    stored azimuth survives the round trip.
    """
    x, y, z = (float(c) for c in v)
    rho = math.hypot(x, y)
    phi = math.atan2(max(z, 0.0), rho)
    if rho < 1e-15 * R and psi_hint is not None:
        psi = psi_hint
    else:
        psi = math.atan2(y, x)
    return DefenderPose(psi, phi, R)


def intruder_from_cartesian(v: Vec3) -> IntruderPose:
    x, y = float(v[0]), float(v[1])
    return IntruderPose(math.atan2(y, x), math.hypot(x, y))


def relative_state(d: DefenderPose, a: IntruderPose, nu: float) -> RelativeState:
    return RelativeState(wrap_angle(a.psi_A - d.psi_D), d.phi_D, a.r, d.R, nu)


def great_circle_distance(p: Vec3, q: Vec3, R: float, tol: float = SURFACE_TOL) -> float:
    """Arc length between two points of the sphere of radius ``R``.

    Raises
    ------
    GeometryError
        If either point is farther than ``tol * R`` from the sphere.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for name, v in (("p", p), ("q", q)):
        off = abs(float(np.linalg.norm(v)) - R)
        if off > tol * max(R, 1.0):
            raise GeometryError(f"point {name} is {off:.3e} off the sphere of radius {R}")
    c = float(np.dot(p, q)) / (R * R)
    return R * math.acos(min(1.0, max(-1.0, c)))


def rotate_z(v: Vec3, angle: float) -> Vec3:
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = (float(t) for t in v)
    return vec3(x * c - y * s, x * s + y * c, z)


def breaching_point_cartesian(theta_star_abs: float, R: float) -> Vec3:
    if not R > 0:
        raise GeometryError(f"hemisphere radius must be positive, got {R}")
    return vec3(R * math.cos(theta_star_abs), R * math.sin(theta_star_abs), 0.0)
