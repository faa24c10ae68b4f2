"""Planar poses, twists, and wrapped-angle arithmetic shared by every other module."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval [-pi, pi)."""
    _require_finite("angle", theta)
    wrapped = math.remainder(theta, TWO_PI)
    # math.remainder lands in [-pi, pi]; fold the closed upper endpoint.
    return -math.pi if wrapped == math.pi else wrapped


def angle_diff(target: float, current: float) -> float:
    """Shortest signed angular error target - current, in [-pi, pi)."""
    _require_finite("angle", target, current)
    return wrap_angle(target - current)


@dataclass
class Vec2:
    x: float = 0.0
    y: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("Vec2 component", self.x, self.y)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def rotate(theta: float, p: Vec2) -> Vec2:
    """Rotate a vector by theta (counterclockwise, standard 2D rotation)."""
    _require_finite("angle", theta)
    c, s = math.cos(theta), math.sin(theta)
    return Vec2(c * p.x - s * p.y, s * p.x + c * p.y)


@dataclass
class Pose2D:
    """Planar pose; the heading is wrapped to [-pi, pi) at construction."""

    x: float = 0.0      # m
    y: float = 0.0      # m
    theta: float = 0.0  # rad

    def __post_init__(self) -> None:
        _require_finite("Pose2D component", self.x, self.y, self.theta)
        self.theta = wrap_angle(self.theta)

    @property
    def position(self) -> Vec2:
        return Vec2(self.x, self.y)

    def to_world(self, p_local: Vec2) -> Vec2:
        """Map a point from this pose's frame to the world frame."""
        return self.position + rotate(self.theta, p_local)

    def to_local(self, p_world: Vec2) -> Vec2:
        """Map a world point into this pose's frame."""
        return rotate(-self.theta, p_world - self.position)


@dataclass
class Twist2D:
    """Commanded base velocity in the robot frame."""

    vx: float = 0.0     # m/s, forward
    vy: float = 0.0     # m/s, lateral (left positive)
    omega: float = 0.0  # rad/s

    def __post_init__(self) -> None:
        _require_finite("Twist2D component", self.vx, self.vy, self.omega)

    def linear_norm(self) -> float:
        return math.hypot(self.vx, self.vy)
