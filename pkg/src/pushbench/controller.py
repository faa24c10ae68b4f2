"""Reactive and non-reactive pushing controllers for a holonomic base.

The reactive strategy steers like a kinematic bicycle toward the target while a
logistic function of the contact's lateral offset trades forward for lateral
velocity, sliding the object back toward the base centerline.  If the contact
still reaches the critical edge region, a realignment state takes over:
maximum lateral rate, rotation attenuated toward zero near the edges, with a
hysteresis threshold deciding when normal pushing resumes.  The non-reactive
baseline keeps the lateral rate at zero and never realigns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .geometry import Pose2D, Twist2D, Vec2, angle_diff, rotate
from .tactile import ContactReport

# Steering is clamped short of +-pi/2 so tan() in the turn-rate law stays
# finite and the turn direction never flips.
GAMMA_MARGIN = 0.01
GAMMA_LIMIT = math.pi / 2.0 - GAMMA_MARGIN

MODE_RPS = "rps"
MODE_NPS = "nps"


class Status(Enum):
    APPROACHING = "approaching"
    PUSHING = "pushing"
    REALIGNING = "realigning"
    REACHED = "reached"


def _sgn(x: float) -> float:
    if x == 0.0:
        return 0.0
    return math.copysign(1.0, x)


@dataclass
class ControllerParams:
    velocity_gain: float = 0.1       # 1/s, distance -> speed
    heading_gain: float = 1.0
    curvature_length: float = 0.2    # m, turn-rate sharpness scale
    rate_floor: float = 0.0          # logistic lower asymptote
    rate_ceiling: float = 10.0       # logistic upper asymptote
    rate_inflection: float = 0.12    # m, offset where the logistic is halfway
    rate_steepness: float = 60.0     # 1/m
    lateral_cutoff_dist: float = 0.5  # m, inside this the lateral rate is zeroed
    critical_offset: float = 0.24    # m, |offset| beyond this triggers realignment
    middle_offset: float = 0.05      # m, realignment holds until back inside this
    realign_rate: float = 10.0       # lateral rate used while realigning
    success_dist: float = 0.05       # m
    v_lin_max: float = 0.05          # m/s
    omega_max: float = 0.15          # rad/s
    v_approach: float = 0.01         # m/s, creep speed with no contact
    mode: str = MODE_RPS

    def __post_init__(self) -> None:
        if self.mode not in (MODE_RPS, MODE_NPS):
            raise ValueError(f"mode must be '{MODE_RPS}' or '{MODE_NPS}', got {self.mode!r}")
        if not 0.0 <= self.rate_floor < self.rate_ceiling:
            raise ValueError("need 0 <= rate_floor < rate_ceiling")
        if self.rate_inflection <= 0.0 or self.rate_steepness < 0.0:
            raise ValueError("rate_inflection must be > 0 and rate_steepness >= 0")
        if not 0.0 < self.middle_offset < self.critical_offset:
            raise ValueError("need 0 < middle_offset < critical_offset")
        for name in ("velocity_gain", "heading_gain", "curvature_length",
                     "success_dist", "v_lin_max", "omega_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ControllerState:
    """Per-trial controller memory; one instance per trial, never shared."""

    threshold: float                      # current hysteresis threshold on |offset|
    realigning: bool = False
    last_contact: ContactReport | None = None
    last_contact_time: float = math.nan
    reached: bool = False


def initial_state(params: ControllerParams) -> ControllerState:
    return ControllerState(threshold=params.critical_offset)


@dataclass(frozen=True)
class ControllerInput:
    robot: Pose2D
    target: Vec2
    contact: ContactReport
    time: float = 0.0


@dataclass(frozen=True)
class StepDebug:
    """Per-step internals for the trace log."""

    status: Status
    lateral: float            # contact offset fed to the law (NaN if no contact)
    rate: float               # lateral rate actually used
    steering: float           # clamped steering angle (NaN during approach)
    rotation_scale: float     # realignment attenuation (NaN outside realignment)
    distance: float           # |displacement| (NaN before any contact)
    raw: Twist2D
    command: Twist2D
    contact_point: Vec2 | None


def displacement(robot: Pose2D, target: Vec2, contact_point: Vec2) -> Vec2:
    """World-frame vector from the (robot-frame) contact point to the target."""
    return target - (robot.position + rotate(robot.theta, contact_point))


def push_speed(distance: float, params: ControllerParams) -> float:
    """Linear speed magnitude, proportional to the remaining distance."""
    return params.velocity_gain * distance


def lateral_rate(offset: float, distance: float, params: ControllerParams) -> float:
    """Logistic lateral-vs-forward rate; zeroed close to the target.

    Small near the centerline, escalating toward the rate ceiling as the
    contact approaches the base edges, signed like the offset.
    """
    if distance <= params.lateral_cutoff_dist:
        return 0.0
    span = params.rate_ceiling - params.rate_floor
    mag = params.rate_floor + span / (1.0 + math.exp(
        (params.rate_inflection - abs(offset)) * params.rate_steepness))
    return mag * _sgn(offset)


def linear_velocity(speed: float, rate: float) -> tuple[float, float]:
    """Split speed into (vx, vy) with |v| == speed and vy/vx == rate."""
    den = math.sqrt(1.0 + rate * rate)
    return speed / den, rate * speed / den


def steering_angle(d: Vec2, heading: float, params: ControllerParams) -> float:
    """Clamped steering angle toward the displacement direction."""
    if d.x == 0.0 and d.y == 0.0:
        raise ValueError("steering undefined for zero displacement")
    desired = math.atan2(d.y, d.x)
    gamma = params.heading_gain * angle_diff(desired, heading)
    return max(-GAMMA_LIMIT, min(GAMMA_LIMIT, gamma))


def turn_rate(vx: float, gamma: float, params: ControllerParams) -> float:
    """Bicycle-style turn rate from forward speed and steering angle."""
    return vx / params.curvature_length * math.tan(gamma)


def rotation_scale(offset: float, params: ControllerParams) -> float:
    """Realignment rotation attenuation: 1 at center, 0 at/beyond the critical offset."""
    a = abs(offset)
    if a <= params.critical_offset:
        return 1.0 - a / params.critical_offset
    return 0.0


def realign_turn_rate(speed: float, offset: float, gamma: float,
                      params: ControllerParams) -> float:
    """Turn rate while realigning: attenuated so recentering wins near the edges."""
    return rotation_scale(offset, params) * speed / params.curvature_length * math.tan(gamma)


def _saturate(vx: float, vy: float, omega: float, params: ControllerParams) -> Twist2D:
    mag = math.sqrt(vx * vx + vy * vy)
    if mag > params.v_lin_max:
        s = params.v_lin_max / mag
        vx *= s
        vy *= s
    omega = max(-params.omega_max, min(params.omega_max, omega))
    return Twist2D(vx, vy, omega)


def step_with_debug(
    state: ControllerState,
    inp: ControllerInput,
    params: ControllerParams,
) -> tuple[Twist2D, ControllerState, Status, StepDebug]:
    """One control step; pure in (state, input, params), returns the next state."""
    st = replace(state)
    contact = inp.contact
    if contact.exists:
        st.last_contact = contact
        st.last_contact_time = inp.time

    def dbg(status, twist, raw=None, lateral=math.nan, rate=math.nan,
            steering=math.nan, scale=math.nan, distance=math.nan, point=None):
        return StepDebug(status, lateral, rate, steering, scale, distance,
                         raw if raw is not None else twist, twist, point)

    reference = contact if contact.exists else st.last_contact
    if reference is None or reference.point is None:
        # Nothing ever sensed: creep straight ahead until first touch.
        twist = Twist2D(params.v_approach, 0.0, 0.0)
        return twist, st, Status.APPROACHING, dbg(Status.APPROACHING, twist)

    point = reference.point
    d = displacement(inp.robot, inp.target, point)
    dist = d.norm()

    if st.reached or dist < params.success_dist:
        st.reached = True
        twist = Twist2D(0.0, 0.0, 0.0)
        return twist, st, Status.REACHED, dbg(
            Status.REACHED, twist, distance=dist, point=point)

    if not contact.exists:
        # Contact dropout mid-task: hold the last-known point for bookkeeping
        # and creep forward until the strip sees the object again.
        twist = Twist2D(params.v_approach, 0.0, 0.0)
        return twist, st, Status.APPROACHING, dbg(
            Status.APPROACHING, twist, distance=dist, point=point)

    offset = contact.lateral
    gamma = steering_angle(d, inp.robot.theta, params)
    speed = push_speed(dist, params)

    if params.mode == MODE_RPS and abs(offset) > st.threshold:
        st.threshold = params.middle_offset
        st.realigning = True
        rate = params.realign_rate * _sgn(offset)
        vx, vy = linear_velocity(speed, rate)
        scale = rotation_scale(offset, params)
        omega = realign_turn_rate(speed, offset, gamma, params)
        status = Status.REALIGNING
    else:
        st.threshold = params.critical_offset
        st.realigning = False
        rate = 0.0 if params.mode == MODE_NPS else lateral_rate(offset, dist, params)
        vx, vy = linear_velocity(speed, rate)
        scale = math.nan
        omega = turn_rate(vx, gamma, params)
        status = Status.PUSHING

    raw = Twist2D(vx, vy, omega)
    command = _saturate(vx, vy, omega, params)
    return command, st, status, dbg(
        status, command, raw=raw, lateral=offset, rate=rate, steering=gamma,
        scale=scale, distance=dist, point=point)


def controller_step(
    state: ControllerState,
    inp: ControllerInput,
    params: ControllerParams,
) -> tuple[Twist2D, ControllerState, Status]:
    """Commanded twist, next state, and status for one control period."""
    twist, st, status, _ = step_with_debug(state, inp, params)
    return twist, st, status
