"""Pushed-object models: footprints, mass properties, and ground-support grids.

The catalog matches the benchmark object set: a uniform 20 kg box, a 15 kg box
with an off-center weight (asymmetric mass distribution), and a 25 kg cylinder,
each pairable with one of two friction sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Vec2

GRAVITY = 9.81  # m/s^2

# (mu object-ground, mu object-robot)
FRICTION_SETS = {
    "S1": (0.3, 0.35),
    "S2": (0.2, 0.5),
}

OBJECT_KINDS = ("uniform_box", "nonuniform_box", "cylinder")


@dataclass(frozen=True)
class PolygonFootprint:
    """Convex polygon in the object body frame, vertices counterclockwise."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("polygon footprint needs at least 3 vertices")
        if abs(polygon_area(self.vertices)) < 1e-12:
            raise ValueError("degenerate (zero-area) polygon footprint")

    @property
    def verts(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)


@dataclass(frozen=True)
class DiskFootprint:
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError("disk footprint needs a positive radius")


Footprint = PolygonFootprint | DiskFootprint


def polygon_area(vertices) -> float:
    a = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def rect_vertices(half_x: float, half_y: float) -> tuple[tuple[float, float], ...]:
    return (
        (half_x, half_y),
        (-half_x, half_y),
        (-half_x, -half_y),
        (half_x, -half_y),
    )


@dataclass
class ObjectModel:
    """One pushable rigid body: shape, inertia, and friction description.

    Support points sample the ground-contact pressure distribution; their
    weights are nonnegative and sum to one.  ``com_offset`` is expressed in the
    footprint (body) frame.
    """

    footprint: Footprint
    mass: float                       # kg
    com_offset: Vec2                  # m, body frame
    yaw_inertia: float                # kg m^2, about the COM
    support_points: np.ndarray        # (K, 2) body frame
    support_weights: np.ndarray       # (K,)
    mu_ground: float
    mu_robot: float
    name: str = "object"

    def __post_init__(self) -> None:
        self.support_points = np.asarray(self.support_points, dtype=float)
        self.support_weights = np.asarray(self.support_weights, dtype=float)
        if self.mass <= 0.0 or self.yaw_inertia <= 0.0:
            raise ValueError("mass and yaw inertia must be positive")
        if np.any(self.support_weights < 0.0):
            raise ValueError("support weights must be nonnegative")
        total = float(self.support_weights.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"support weights must sum to 1, got {total}")
        if len(self.support_points) != len(self.support_weights):
            raise ValueError("support point/weight length mismatch")
        if not self.contains_local(self.com_offset.x, self.com_offset.y):
            raise ValueError("COM offset must lie inside the footprint")

    def contains_local(self, x: float, y: float, margin: float = 1e-9) -> bool:
        if isinstance(self.footprint, DiskFootprint):
            return math.hypot(x, y) <= self.footprint.radius + margin
        verts = self.footprint.vertices
        n = len(verts)
        for i in range(n):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % n]
            # CCW polygon: inside means left of every edge.
            if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) < -margin:
                return False
        return True

    @property
    def half_depth(self) -> float:
        """Half extent along body +x, used to place the object ahead of the robot."""
        if isinstance(self.footprint, DiskFootprint):
            return self.footprint.radius
        return max(v[0] for v in self.footprint.vertices)


def _grid_support(half_x: float, half_y: float, n: int = 5) -> np.ndarray:
    xs = np.linspace(-half_x, half_x, n + 2)[1:-1]
    ys = np.linspace(-half_y, half_y, n + 2)[1:-1]
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _disk_support(radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Equal-area ring layout: 1 center + 8 + 16 points, uniform weights.

    Ring radii sit at the area centroids of the three equal-area-per-point
    annuli, which keeps the rotational braking torque within 1% of the
    analytic (2/3) * mu * m * g * r value for a uniform disk.
    """
    pts = [(0.0, 0.0)]
    ring_specs = ((8, radius * (2.0 / 3.0) * (27.0 - 1.0) / (9.0 - 1.0) / 5.0),
                  (16, radius * (2.0 / 3.0) * (125.0 - 27.0) / (25.0 - 9.0) / 5.0))
    for count, rho in ring_specs:
        for k in range(count):
            ang = 2.0 * math.pi * k / count
            pts.append((rho * math.cos(ang), rho * math.sin(ang)))
    pts_arr = np.asarray(pts, dtype=float)
    w = np.full(len(pts), 1.0 / len(pts))
    return pts_arr, w


def _rect_plate_inertia(mass: float, size_x: float, size_y: float) -> float:
    return mass * (size_x ** 2 + size_y ** 2) / 12.0


def make_object(kind: str, friction_set: str = "S1") -> ObjectModel:
    """Build one of the three benchmark objects with the given friction set."""
    try:
        mu_ground, mu_robot = FRICTION_SETS[friction_set]
    except KeyError:
        raise ValueError(f"unknown friction set {friction_set!r}; choose from {sorted(FRICTION_SETS)}")

    if kind == "uniform_box":
        side = 0.40
        mass = 20.0
        half = side / 2.0
        support = _grid_support(half, half)
        weights = np.full(len(support), 1.0 / len(support))
        return ObjectModel(
            footprint=PolygonFootprint(rect_vertices(half, half)),
            mass=mass,
            com_offset=Vec2(0.0, 0.0),
            yaw_inertia=_rect_plate_inertia(mass, side, side),
            support_points=support,
            support_weights=weights,
            mu_ground=mu_ground,
            mu_robot=mu_robot,
            name="uniform_box",
        )

    if kind == "nonuniform_box":
        side = 0.45
        box_mass = 5.0
        cyl_mass = 10.0
        cyl_radius = 0.10
        half = side / 2.0
        # Weight cylinder sits over the rear-left corner, inset by its radius.
        cyl_center = Vec2(-half + cyl_radius, half - cyl_radius)
        mass = box_mass + cyl_mass
        com = cyl_center.scaled(cyl_mass / mass)
        inertia = (
            _rect_plate_inertia(box_mass, side, side)
            + box_mass * (com.x ** 2 + com.y ** 2)
            + 0.5 * cyl_mass * cyl_radius ** 2
            + cyl_mass * ((cyl_center.x - com.x) ** 2 + (cyl_center.y - com.y) ** 2)
        )
        support = _grid_support(half, half)
        # Pressure follows the composite mass distribution: the box load is
        # spread over all grid points, the cylinder load over the points it covers.
        in_cyl = np.hypot(support[:, 0] - cyl_center.x, support[:, 1] - cyl_center.y) <= cyl_radius
        weights = np.full(len(support), box_mass / len(support))
        weights[in_cyl] += cyl_mass / max(int(in_cyl.sum()), 1)
        weights /= weights.sum()
        return ObjectModel(
            footprint=PolygonFootprint(rect_vertices(half, half)),
            mass=mass,
            com_offset=com,
            yaw_inertia=inertia,
            support_points=support,
            support_weights=weights,
            mu_ground=mu_ground,
            mu_robot=mu_robot,
            name="nonuniform_box",
        )

    if kind == "cylinder":
        radius = 0.25
        mass = 25.0
        support, weights = _disk_support(radius)
        return ObjectModel(
            footprint=DiskFootprint(radius),
            mass=mass,
            com_offset=Vec2(0.0, 0.0),
            yaw_inertia=0.5 * mass * radius ** 2,
            support_points=support,
            support_weights=weights,
            mu_ground=mu_ground,
            mu_robot=mu_robot,
            name="cylinder",
        )

    raise ValueError(f"unknown object kind {kind!r}; choose from {OBJECT_KINDS}")
