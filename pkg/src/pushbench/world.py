"""2D pushing world: velocity-controlled rectangular base, one pushed object.

The base tracks its commanded twist perfectly (holonomic, kinematic); the
object feels penalty contact from the base and regularized Coulomb friction
from the ground, integrated at a fixed millisecond substep.  ``step`` is the
plain-Python reference of one substep; ``advance`` runs the compiled kernel
for many substeps and is what the trial harness uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .geometry import Pose2D, Twist2D, Vec2, rotate
from .objects import GRAVITY, DiskFootprint, ObjectModel, PolygonFootprint

EPS_V = 1e-4     # m/s, friction regularization speed
MAX_DT = 0.01    # s


class NumericalInstability(RuntimeError):
    """Raised when the world state stops being finite."""


@dataclass(frozen=True)
class RobotFootprint:
    """Rectangular base footprint and its penalty-contact parameters."""

    half_length: float = 0.375   # m, along +x (front)
    half_width: float = 0.29     # m, front half-width
    stiffness: float = 5.0e4     # N/m
    damping: float = 200.0       # N s/m

    def __post_init__(self) -> None:
        if self.half_length <= 0.0 or self.half_width <= 0.0:
            raise ValueError("footprint extents must be positive")
        if self.stiffness <= 0.0 or self.damping < 0.0:
            raise ValueError("stiffness must be positive and damping nonnegative")


@dataclass(frozen=True)
class ContactPoint:
    position: Vec2      # world
    normal: Vec2        # world, unit, pointing from the robot into the object
    penetration: float  # m


@dataclass(frozen=True)
class PointForce:
    normal_force: float   # N, along the contact normal
    tangential: Vec2      # N, world frame
    total: Vec2           # N, normal + tangential, applied to the object


@dataclass
class WorldState:
    robot: Pose2D
    robot_twist: Twist2D
    object_pose: Pose2D                          # footprint-origin pose
    object_velocity: tuple[float, float, float]  # COM velocity (vx, vy) + yaw rate
    time: float = 0.0
    manifold: tuple[ContactPoint, ...] = ()

    def is_finite(self) -> bool:
        vals = (self.robot.x, self.robot.y, self.robot.theta,
                self.object_pose.x, self.object_pose.y, self.object_pose.theta,
                *self.object_velocity)
        return all(math.isfinite(v) for v in vals)


def initial_world_state(model: ObjectModel, footprint: RobotFootprint,
                        gap: float = 0.05, lateral_offset: float = 0.0) -> WorldState:
    """Robot at the origin facing +x; object centered ahead with the given gap."""
    x0 = footprint.half_length + gap + model.half_depth
    return WorldState(
        robot=Pose2D(0.0, 0.0, 0.0),
        robot_twist=Twist2D(),
        object_pose=Pose2D(x0, lateral_offset, 0.0),
        object_velocity=(0.0, 0.0, 0.0),
    )


# --- packing between the dataclass view and the kernel arrays -------------

def pack_object(model: ObjectModel):
    """Kernel argument tuple describing the object."""
    if isinstance(model.footprint, PolygonFootprint):
        kind = 0
        verts = np.ascontiguousarray(model.footprint.verts, dtype=float)
        radius = 0.0
    else:
        kind = 1
        verts = np.zeros((1, 2))
        radius = float(model.footprint.radius)
    com = np.array([model.com_offset.x, model.com_offset.y])
    sup = np.ascontiguousarray(model.support_points, dtype=float)
    supw = np.ascontiguousarray(model.support_weights, dtype=float)
    return (kind, verts, radius, com, float(model.mass), float(model.yaw_inertia),
            float(model.mu_ground), float(model.mu_robot), sup, supw)


def state_to_array(state: WorldState, model: ObjectModel) -> np.ndarray:
    com_w = state.object_pose.to_world(model.com_offset)
    return np.array([
        state.robot.x, state.robot.y, state.robot.theta,
        com_w.x, com_w.y, state.object_pose.theta,
        *state.object_velocity,
    ])


def array_to_state(arr: np.ndarray, model: ObjectModel, command: Twist2D,
                   time: float, manifold: tuple[ContactPoint, ...] = ()) -> WorldState:
    origin = Vec2(arr[3], arr[4]) - rotate(arr[5], model.com_offset)
    return WorldState(
        robot=Pose2D(arr[0], arr[1], arr[2]),
        robot_twist=command,
        object_pose=Pose2D(origin.x, origin.y, arr[5]),
        object_velocity=(float(arr[6]), float(arr[7]), float(arr[8])),
        time=time,
        manifold=manifold,
    )


def manifold_from_diag(diag: np.ndarray) -> tuple[ContactPoint, ...]:
    pts = []
    for base in (_kernels.DIAG_P0, _kernels.DIAG_P1):
        if len(pts) >= int(diag[_kernels.DIAG_NCP]):
            break
        pts.append(ContactPoint(
            position=Vec2(diag[base], diag[base + 1]),
            normal=Vec2(diag[base + 2], diag[base + 3]),
            penetration=float(diag[base + 4]),
        ))
    return tuple(pts[: int(diag[_kernels.DIAG_NCP])])


# --- spec operations -------------------------------------------------------

def detect_contact(robot: Pose2D, footprint: RobotFootprint,
                   model: ObjectModel, object_pose: Pose2D) -> list[ContactPoint]:
    """Contact manifold (0-2 points) between the base rectangle and the object.

    Face-on-face overlap yields the two ends of the overlap segment; a vertex
    or tangential touch yields one point.
    """
    hl, hw = footprint.half_length, footprint.half_width
    if isinstance(model.footprint, PolygonFootprint):
        verts = model.footprint.verts
        co, so = math.cos(object_pose.theta), math.sin(object_pose.theta)
        wx = object_pose.x + co * verts[:, 0] - so * verts[:, 1]
        wy = object_pose.y + so * verts[:, 0] + co * verts[:, 1]
        cr, sr = math.cos(robot.theta), math.sin(robot.theta)
        dx = wx - robot.x
        dy = wy - robot.y
        lx = np.ascontiguousarray(cr * dx + sr * dy)
        ly = np.ascontiguousarray(-sr * dx + cr * dy)
        ncp, p0x, p0y, pe0, p1x, p1y, pe1, nlx, nly = _kernels._poly_manifold(lx, ly, hl, hw)
        raw = ((p0x, p0y, pe0), (p1x, p1y, pe1))[:ncp]
    else:
        c = robot.to_local(object_pose.to_world(Vec2(0.0, 0.0)))
        ncp, px, py, pen, nlx, nly = _kernels._disk_manifold(
            c.x, c.y, model.footprint.radius, hl, hw)
        raw = ((px, py, pen),)[:ncp]
    n_world = rotate(robot.theta, Vec2(nlx, nly))
    out = []
    for px, py, pen in raw:
        out.append(ContactPoint(robot.to_world(Vec2(px, py)), n_world, float(pen)))
    return out


def ground_friction_wrench(object_pose: Pose2D,
                           velocity: tuple[float, float, float],
                           model: ObjectModel,
                           g: float = GRAVITY,
                           eps_v: float = EPS_V) -> tuple[Vec2, float]:
    """Regularized Coulomb friction from the support plane at the given motion.

    Each support point carries its pressure weight of the object's weight; the
    force opposes that point's velocity, saturating at mu*m*g*w beyond
    ``eps_v`` and proportional to speed below it.  Returns (force, torque
    about the COM).
    """
    vx, vy, w = velocity
    co, so = math.cos(object_pose.theta), math.sin(object_pose.theta)
    rel = model.support_points - np.array([model.com_offset.x, model.com_offset.y])
    ax = co * rel[:, 0] - so * rel[:, 1]
    ay = so * rel[:, 0] + co * rel[:, 1]
    ux = vx - w * ay
    uy = vy + w * ax
    speed = np.sqrt(ux * ux + uy * uy)
    denom = np.maximum(speed, eps_v)
    scale = -model.mu_ground * model.mass * g * model.support_weights / denom
    fx = scale * ux
    fy = scale * uy
    torque = float(np.sum(ax * fy - ay * fx))
    return Vec2(float(np.sum(fx)), float(np.sum(fy))), torque


def robot_contact_wrench(manifold, rel_velocities, mu_robot: float,
                         stiffness: float = 5.0e4, damping: float = 200.0,
                         eps_v: float = EPS_V) -> list[PointForce]:
    """Per-point penalty forces on the object for a manifold and relative velocities.

    ``rel_velocities`` are object-minus-robot velocities at each contact point.
    The normal force is a clamped spring-damper on penetration; the tangential
    force opposes relative sliding, regularized and capped at mu * N.
    """
    out = []
    for cp, rel in zip(manifold, rel_velocities):
        n = cp.normal
        pen_rate = -(rel.x * n.x + rel.y * n.y)
        normal = max(0.0, stiffness * cp.penetration + damping * pen_rate)
        un = rel.x * n.x + rel.y * n.y
        tx = rel.x - un * n.x
        ty = rel.y - un * n.y
        tmag = math.sqrt(tx * tx + ty * ty)
        scale = -mu_robot * normal / max(tmag, eps_v)
        tangential = Vec2(scale * tx, scale * ty)
        total = Vec2(normal * n.x + tangential.x, normal * n.y + tangential.y)
        out.append(PointForce(normal, tangential, total))
    return out


def _solve3(B00, B01, B02, B11, B12, B22, r0, r1, r2):
    c00 = B11 * B22 - B12 * B12
    c01 = B02 * B12 - B01 * B22
    c02 = B01 * B12 - B02 * B11
    c11 = B00 * B22 - B02 * B02
    c12 = B01 * B02 - B00 * B12
    c22 = B00 * B11 - B01 * B01
    det = B00 * c00 + B01 * c01 + B02 * c02
    return ((c00 * r0 + c01 * r1 + c02 * r2) / det,
            (c01 * r0 + c11 * r1 + c12 * r2) / det,
            (c02 * r0 + c12 * r1 + c22 * r2) / det)


def step(state: WorldState, model: ObjectModel, footprint: RobotFootprint,
         command: Twist2D, dt: float, g: float = GRAVITY,
         eps_v: float = EPS_V) -> WorldState:
    """One reference substep (plain Python mirror of the compiled kernel).

    Robot pose integrates kinematically from the command; the object feels
    penalty contact plus ground friction, friction solved implicitly and
    projected onto the Coulomb cone.
    """
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
    if not state.is_finite():
        raise NumericalInstability("world state is not finite")

    m, inertia = model.mass, model.yaw_inertia
    mu_g, mu_r = model.mu_ground, model.mu_robot
    kn, cn = footprint.stiffness, footprint.damping

    robot = state.robot
    cr, sr = math.cos(robot.theta), math.sin(robot.theta)
    rvx = cr * command.vx - sr * command.vy
    rvy = sr * command.vx + cr * command.vy
    rw = command.omega

    com_w = state.object_pose.to_world(model.com_offset)
    ox, oy = com_w.x, com_w.y
    vx, vy, w = state.object_velocity

    manifold = detect_contact(robot, footprint, model, state.object_pose)

    # Penalty normal forces and robot point velocities.
    GNx = GNy = GNt = 0.0
    normals = []
    for cp in manifold:
        ax, ay = cp.position.x - ox, cp.position.y - oy
        bx, by = cp.position.x - robot.x, cp.position.y - robot.y
        urx, ury = rvx - rw * by, rvy + rw * bx
        uox, uoy = vx - w * ay, vy + w * ax
        pen_rate = -((uox - urx) * cp.normal.x + (uoy - ury) * cp.normal.y)
        N = max(0.0, kn * cp.penetration + cn * pen_rate)
        normals.append((N, ax, ay, urx, ury))
        GNx += N * cp.normal.x
        GNy += N * cp.normal.y
        GNt += ax * (N * cp.normal.y) - ay * (N * cp.normal.x)

    q0 = vx + dt * GNx / m
    q1 = vy + dt * GNy / m
    q2 = w + dt * GNt / inertia

    co, so = math.cos(state.object_pose.theta), math.sin(state.object_pose.theta)
    rel = model.support_points - np.array([model.com_offset.x, model.com_offset.y])
    gx = co * rel[:, 0] - so * rel[:, 1]
    gy = so * rel[:, 0] + co * rel[:, 1]
    cap_g = mu_g * m * g * model.support_weights

    if manifold:
        n0 = manifold[0].normal
        twx, twy = -n0.y, n0.x
    else:
        twx = twy = 0.0

    l0, l1, l2 = q0, q1, q2
    cg = np.zeros(len(gx))
    cc = [0.0, 0.0]
    for _ in range(2):
        ux = l0 - l2 * gy
        uy = l1 + l2 * gx
        spd = np.maximum(np.sqrt(ux * ux + uy * uy), eps_v)
        cg = cap_g / spd
        A00 = float(np.sum(cg))
        A01 = 0.0
        A02 = float(np.sum(-cg * gy))
        A11 = A00
        A12 = float(np.sum(cg * gx))
        A22 = float(np.sum(cg * (gx * gx + gy * gy)))
        r0e = r1e = r2e = 0.0
        for j, cp in enumerate(manifold):
            N, ax, ay, urx, ury = normals[j]
            if N <= 0.0:
                cc[j] = 0.0
                continue
            uox, uoy = l0 - l2 * ay, l1 + l2 * ax
            wrel = (uox - urx) * twx + (uoy - ury) * twy
            c = mu_r * N / max(abs(wrel), eps_v)
            cc[j] = c
            g2 = ax * twy - ay * twx
            A00 += c * twx * twx
            A01 += c * twx * twy
            A02 += c * twx * g2
            A11 += c * twy * twy
            A12 += c * twy * g2
            A22 += c * g2 * g2
            tur = twx * urx + twy * ury
            r0e += c * tur * twx
            r1e += c * tur * twy
            r2e += c * tur * g2
        l0, l1, l2 = _solve3(
            m + dt * A00, dt * A01, dt * A02, m + dt * A11, dt * A12,
            inertia + dt * A22,
            m * q0 + dt * r0e, m * q1 + dt * r1e, inertia * q2 + dt * r2e)

    # Apply friction at the solved velocity, projected onto the cone.
    ux = l0 - l2 * gy
    uy = l1 + l2 * gx
    fx = -cg * ux
    fy = -cg * uy
    mag = np.sqrt(fx * fx + fy * fy)
    over = mag > cap_g
    scale = np.where(over, cap_g / np.where(mag > 0, mag, 1.0), 1.0)
    fx *= scale
    fy *= scale
    Ggx = float(np.sum(fx))
    Ggy = float(np.sum(fy))
    Ggt = float(np.sum(gx * fy - gy * fx))
    Gtx = Gty = Gtt = 0.0
    for j, cp in enumerate(manifold):
        N, ax, ay, urx, ury = normals[j]
        if N <= 0.0:
            continue
        uox, uoy = l0 - l2 * ay, l1 + l2 * ax
        wrel = (uox - urx) * twx + (uoy - ury) * twy
        ft = -cc[j] * wrel
        cap = mu_r * N
        if abs(ft) > cap:
            ft = math.copysign(cap, ft)
        Gtx += ft * twx
        Gty += ft * twy
        Gtt += ax * (ft * twy) - ay * (ft * twx)

    f0 = q0 + dt * (Ggx + Gtx) / m
    f1 = q1 + dt * (Ggy + Gty) / m
    f2 = q2 + dt * (Ggt + Gtt) / inertia

    new_com = Vec2(ox + dt * f0, oy + dt * f1)
    new_oth = state.object_pose.theta + dt * f2
    origin = new_com - rotate(new_oth, model.com_offset)
    new_state = WorldState(
        robot=Pose2D(robot.x + dt * rvx, robot.y + dt * rvy, robot.theta + dt * rw),
        robot_twist=command,
        object_pose=Pose2D(origin.x, origin.y, new_oth),
        object_velocity=(f0, f1, f2),
        time=state.time + dt,
        manifold=tuple(manifold),
    )
    if not new_state.is_finite():
        raise NumericalInstability("world state became non-finite during step")
    return new_state


def advance(state: WorldState, model: ObjectModel, footprint: RobotFootprint,
            command: Twist2D, dt: float, n_sub: int,
            g: float = GRAVITY, eps_v: float = EPS_V) -> tuple[WorldState, np.ndarray]:
    """Run ``n_sub`` kernel substeps; returns the new state and the diagnostics."""
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
    arr = state_to_array(state, model)
    cmd = np.array([command.vx, command.vy, command.omega])
    diag = np.zeros(_kernels.DIAG_SIZE)
    kind, verts, radius, com, mass, inertia, mu_g, mu_r, sup, supw = pack_object(model)
    _kernels.advance(arr, cmd, dt, n_sub, kind, verts, radius, com, mass, inertia,
                     mu_g, mu_r, sup, supw, footprint.half_length, footprint.half_width,
                     footprint.stiffness, footprint.damping, eps_v, g, diag)
    if not np.all(np.isfinite(arr)):
        raise NumericalInstability("world state became non-finite during advance")
    new = array_to_state(arr, model, command, state.time + dt * n_sub,
                         manifold_from_diag(diag))
    return new, diag
