"""Virtual taxel strip on the robot base and contact localization.

The strip covers the front, left, and right edges of the rectangular base.
Each taxel owns a cell (a segment of the edge); it fires when the pushed
object's surface has moved past that cell deeper than the activation
threshold, mimicking foam compression above the sensing electronics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Pose2D, Vec2, rotate
from .objects import DiskFootprint, Footprint, PolygonFootprint

SIDE_FRONT, SIDE_LEFT, SIDE_RIGHT = 0, 1, 2


class ContactKind(Enum):
    POINT = "point"
    LINE = "line"


@dataclass(frozen=True)
class ContactReport:
    """What the tactile system reports to the controller, in the robot frame."""

    exists: bool
    kind: ContactKind | None = None
    point: Vec2 | None = None      # contact centroid
    lateral: float | None = None   # point.y, offset from the base centerline
    taxels: tuple[int, ...] = ()

    @staticmethod
    def none() -> "ContactReport":
        return ContactReport(exists=False)


@dataclass(frozen=True)
class TaxelArray:
    """Taxel layout over the base edges, with per-taxel cells and strip ordering."""

    positions: np.ndarray    # (N, 2) robot frame, on the footprint boundary
    sides: np.ndarray        # (N,) SIDE_* codes
    cells: np.ndarray        # (N, 2) [lo, hi] along the edge coordinate (y on front, x on sides)
    strip_coord: np.ndarray  # (N,) arc length along right -> front -> left
    threshold: float         # m of penetration required to fire
    half_length: float       # robot half length (x extent)
    half_width: float        # robot front half width (y extent)

    def __len__(self) -> int:
        return len(self.positions)


def make_taxel_array(
    front: int = 24,
    left: int = 9,
    right: int = 9,
    half_length: float = 0.375,
    half_width: float = 0.29,
    threshold: float = 1e-4,
) -> TaxelArray:
    """Evenly spaced taxels: ``front`` across the front edge, ``left``/``right`` along the sides.

    The default 24 + 9 + 9 split puts most of the 42 sensing cells where pushing
    contact happens.
    """
    if min(front, left, right) < 1:
        raise ValueError("each side needs at least one taxel")
    positions, sides, cells, strip = [], [], [], []

    def edge(n, lo, hi):
        pitch = (hi - lo) / n
        for i in range(n):
            c0 = lo + i * pitch
            yield c0 + 0.5 * pitch, (c0, c0 + pitch)

    # Strip arc length runs right-rear -> front-right corner -> front-left corner -> left-rear.
    for y, cell in edge(front, -half_width, half_width):
        positions.append((half_length, y))
        sides.append(SIDE_FRONT)
        cells.append(cell)
        strip.append(2.0 * half_length + (y + half_width))
    for x, cell in edge(left, -half_length, half_length):
        positions.append((x, half_width))
        sides.append(SIDE_LEFT)
        cells.append(cell)
        strip.append(2.0 * half_length + 2.0 * half_width + (half_length - x))
    for x, cell in edge(right, -half_length, half_length):
        positions.append((x, -half_width))
        sides.append(SIDE_RIGHT)
        cells.append(cell)
        strip.append(x + half_length)

    return TaxelArray(
        positions=np.asarray(positions, dtype=float),
        sides=np.asarray(sides, dtype=int),
        cells=np.asarray(cells, dtype=float),
        strip_coord=np.asarray(strip, dtype=float),
        threshold=float(threshold),
        half_length=float(half_length),
        half_width=float(half_width),
    )


def _slice_interval_polygon(verts: np.ndarray, axis: int, value: float) -> tuple[float, float] | None:
    """Extent of a convex polygon cut by the line {coordinate[axis] == value}.

    Returns the interval of the other coordinate, or None if the line misses.
    """
    other = 1 - axis
    lo, hi = math.inf, -math.inf
    n = len(verts)
    for i in range(n):
        p = verts[i]
        q = verts[(i + 1) % n]
        dp = p[axis] - value
        dq = q[axis] - value
        if dp == 0.0:
            lo = min(lo, p[other])
            hi = max(hi, p[other])
        if (dp < 0.0 < dq) or (dq < 0.0 < dp):
            t = dp / (dp - dq)
            c = p[other] + t * (q[other] - p[other])
            lo = min(lo, c)
            hi = max(hi, c)
    if lo > hi:
        return None
    return lo, hi


def _slice_interval_disk(center: Vec2, radius: float, axis: int, value: float) -> tuple[float, float] | None:
    d = (center.x if axis == 0 else center.y) - value
    if abs(d) > radius:
        return None
    half = math.sqrt(radius * radius - d * d)
    c = center.y if axis == 0 else center.x
    return c - half, c + half


def _intersect(a: tuple[float, float] | None, b: tuple[float, float] | None) -> tuple[float, float] | None:
    if a is None or b is None:
        return None
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    if lo >= hi:
        return None
    return lo, hi


def sample_taxels(
    robot: Pose2D,
    footprint: Footprint,
    object_pose: Pose2D,
    array: TaxelArray,
) -> list[int]:
    """Indices of taxels whose cell the object has penetrated beyond the threshold.

    Penetration at an edge point is the depth the object surface has travelled
    past the base boundary there; a cell fires when any part of it sees more
    than ``array.threshold``.
    """
    hl, hw, t = array.half_length, array.half_width, array.threshold

    if isinstance(footprint, PolygonFootprint):
        # Object vertices in the robot frame.
        co, so = math.cos(object_pose.theta), math.sin(object_pose.theta)
        verts = footprint.verts
        wx = object_pose.x + co * verts[:, 0] - so * verts[:, 1]
        wy = object_pose.y + so * verts[:, 0] + co * verts[:, 1]
        cr, sr = math.cos(robot.theta), math.sin(robot.theta)
        dx = wx - robot.x
        dy = wy - robot.y
        local = np.column_stack([cr * dx + sr * dy, -sr * dx + cr * dy])

        def slice_at(axis, value):
            return _slice_interval_polygon(local, axis, value)
    else:
        center = robot.to_local(object_pose.to_world(Vec2(0.0, 0.0)))
        radius = footprint.radius

        def slice_at(axis, value):
            return _slice_interval_disk(center, radius, axis, value)

    # Material must cover the edge line and still be present one threshold deeper.
    front = _intersect(_intersect(slice_at(0, hl), slice_at(0, hl - t)), (-hw, hw))
    left = _intersect(_intersect(slice_at(1, hw), slice_at(1, hw - t)), (-hl, hl))
    right = _intersect(_intersect(slice_at(1, -hw), slice_at(1, -hw + t)), (-hl, hl))

    spans = {SIDE_FRONT: front, SIDE_LEFT: left, SIDE_RIGHT: right}
    active = []
    for i in range(len(array)):
        span = spans[int(array.sides[i])]
        if span is None:
            continue
        c0, c1 = array.cells[i]
        if max(span[0], c0) < min(span[1], c1):
            active.append(i)
    return active


def localize_contact(activations, array: TaxelArray) -> ContactReport:
    """Collapse an activation set into a contact report.

    One active taxel is a point contact at that taxel.  Several active taxels
    form a line contact located at the midpoint of the two extreme taxels,
    extremes taken along the sensing strip so contacts wrapping a corner are
    still ordered consistently.
    """
    idx = sorted(set(int(i) for i in activations))
    if idx and (idx[0] < 0 or idx[-1] >= len(array)):
        raise IndexError(f"activation index out of range for {len(array)} taxels")
    if not idx:
        return ContactReport.none()
    if len(idx) == 1:
        pos = array.positions[idx[0]]
        p = Vec2(float(pos[0]), float(pos[1]))
        return ContactReport(True, ContactKind.POINT, p, p.y, (idx[0],))
    order = sorted(idx, key=lambda i: array.strip_coord[i])
    a = array.positions[order[0]]
    b = array.positions[order[-1]]
    p = Vec2(float(0.5 * (a[0] + b[0])), float(0.5 * (a[1] + b[1])))
    return ContactReport(True, ContactKind.LINE, p, p.y, tuple(idx))
