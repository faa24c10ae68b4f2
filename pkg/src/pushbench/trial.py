"""Single-trial execution: scenario configs, success rules, metrics, traces.

A trial senses the taxel strip at the control rate, runs the controller, and
advances the physics between control ticks until the contact point gets close
enough to the target, the clock runs out, or contact stays lost too long.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .controller import (
    ControllerInput,
    ControllerParams,
    Status,
    initial_state,
    step_with_debug,
)
from .geometry import Pose2D, Twist2D, Vec2, rotate
from .objects import FRICTION_SETS, OBJECT_KINDS, ObjectModel, make_object
from .tactile import ContactKind, TaxelArray, localize_contact, make_taxel_array, sample_taxels
from .world import (
    RobotFootprint,
    WorldState,
    initial_world_state,
    pack_object,
    state_to_array,
)

OUTCOME_SUCCESS = "success"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_CONTACT_LOSS = "contact_loss"
OUTCOME_ABORT = "numerical_abort"

STATUS_CODE = {
    Status.APPROACHING: 0,
    Status.PUSHING: 1,
    Status.REALIGNING: 2,
    Status.REACHED: 3,
}
STATUS_NAME = {v: k.value for k, v in STATUS_CODE.items()}
KIND_CODE = {None: 0, ContactKind.POINT: 1, ContactKind.LINE: 2}
KIND_NAME = {0: "none", 1: "point", 2: "line"}


@dataclass
class ScenarioConfig:
    """Everything needed to run one pushing trial deterministically."""

    object_kind: str = "uniform_box"
    friction_set: str = "S1"
    target: tuple[float, float] = (2.0, 0.0)
    mode: str = "rps"
    seed: int = 0
    timeout: float = 300.0              # s
    contact_loss_limit: float = 150.0   # s, one continuous interval by default
    contact_loss_cumulative: bool = False
    d_success: float = 0.05             # m
    object_gap: float = 0.05            # m between robot front edge and object
    lateral_jitter: float = 0.0         # m, seeded uniform +- offset of the object
    object_pose: tuple[float, float, float] | None = None  # explicit override
    dt: float = 0.001                   # s, physics substep
    control_period: float = 0.02        # s, controller tick
    params: dict = field(default_factory=dict)     # ControllerParams overrides
    taxels: dict = field(default_factory=dict)     # make_taxel_array overrides
    footprint: dict = field(default_factory=dict)  # RobotFootprint overrides

    def __post_init__(self) -> None:
        if self.object_kind not in OBJECT_KINDS:
            raise ValueError(f"unknown object kind {self.object_kind!r}")
        if self.friction_set not in FRICTION_SETS:
            raise ValueError(f"unknown friction set {self.friction_set!r}")
        if self.timeout <= 0.0:
            raise ValueError("timeout must be positive")
        if tuple(self.target) == (0.0, 0.0):
            raise ValueError("target coincides with the robot start position")
        n = self.control_period / self.dt
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ValueError("control_period must be a positive multiple of dt")

    @property
    def substeps(self) -> int:
        return int(round(self.control_period / self.dt))

    def build_object(self) -> ObjectModel:
        return make_object(self.object_kind, self.friction_set)

    def build_footprint(self) -> RobotFootprint:
        return RobotFootprint(**self.footprint)

    def build_taxels(self) -> TaxelArray:
        kw = dict(self.taxels)
        kw.setdefault("half_length", self.build_footprint().half_length)
        kw.setdefault("half_width", self.build_footprint().half_width)
        return make_taxel_array(**kw)

    def build_params(self) -> ControllerParams:
        kwargs = {"mode": self.mode, "success_dist": self.d_success}
        kwargs.update(self.params)
        return ControllerParams(**kwargs)

    def build_world(self, model: ObjectModel, footprint: RobotFootprint) -> WorldState:
        if self.object_pose is not None:
            x, y, th = self.object_pose
            ws = initial_world_state(model, footprint, gap=self.object_gap)
            ws.object_pose = Pose2D(x, y, th)
            return ws
        offset = 0.0
        if self.lateral_jitter > 0.0:
            rng = np.random.default_rng(self.seed)
            offset = float(rng.uniform(-self.lateral_jitter, self.lateral_jitter))
        return initial_world_state(model, footprint, gap=self.object_gap,
                                   lateral_offset=offset)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        if "target" in data:
            data["target"] = tuple(data["target"])
        if data.get("object_pose") is not None:
            data["object_pose"] = tuple(data["object_pose"])
        return cls(**data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


class TrialMonitor:
    """Applies the success / timeout / contact-loss rules tick by tick.

    ``update`` is called at sensing time with the current clock, whether the
    strip reports contact, and the contact-to-target distance (NaN before any
    contact).  It returns an outcome string once a rule fires, success taking
    precedence over contact loss, contact loss over timeout.
    """

    def __init__(self, timeout: float, loss_limit: float, d_success: float,
                 cumulative: bool = False):
        self.timeout = timeout
        self.loss_limit = loss_limit
        self.d_success = d_success
        self.cumulative = cumulative
        self.loss_start: float | None = None
        self.loss_total = 0.0
        self._last_time: float | None = None

    def update(self, t: float, contact: bool, distance: float) -> str | None:
        dt = 0.0 if self._last_time is None else t - self._last_time
        self._last_time = t
        if not contact:
            self.loss_total += dt
            if self.loss_start is None:
                self.loss_start = t - dt
        else:
            self.loss_start = None
        if not math.isnan(distance) and distance < self.d_success:
            return OUTCOME_SUCCESS
        if not contact:
            interval = self.loss_total if self.cumulative else t - self.loss_start
            if interval > self.loss_limit:
                return OUTCOME_CONTACT_LOSS
        if t > self.timeout:
            return OUTCOME_TIMEOUT
        return None


@dataclass
class TrialTrace:
    """Fixed-rate per-tick record of one trial."""

    time: np.ndarray            # (n,)
    robot: np.ndarray           # (n, 3) pose
    object: np.ndarray          # (n, 3) footprint-origin pose
    contact_exists: np.ndarray  # (n,) bool
    contact_kind: np.ndarray    # (n,) 0 none / 1 point / 2 line
    contact_point: np.ndarray   # (n, 2) robot frame, NaN without contact
    lateral: np.ndarray         # (n,) contact offset, NaN without contact
    status: np.ndarray          # (n,) STATUS_CODE values
    rate: np.ndarray            # (n,) lateral rate used
    steering: np.ndarray        # (n,)
    rotation_scale: np.ndarray  # (n,)
    distance: np.ndarray        # (n,) |contact -> target|
    raw_twist: np.ndarray       # (n, 3)
    command: np.ndarray         # (n, 3)
    penetration: np.ndarray     # (n,) deepest contact penetration last period
    normal_force: np.ndarray    # (n,)
    taxels: list | None = None  # per-tick active taxel index tuples

    def __len__(self) -> int:
        return len(self.time)


def deviation_metric(trace: TrialTrace) -> float:
    """Time-averaged |lateral offset| over contact-present intervals (trapezoidal)."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    t = trace.time
    l = np.abs(trace.lateral)
    c = trace.contact_exists.astype(bool)
    both = c[:-1] & c[1:]
    if not np.any(both):
        raise ValueError("trace has no contact interval to integrate over")
    dt = t[1:] - t[:-1]
    integral = float(np.sum(0.5 * (l[:-1] + l[1:])[both] * dt[both]))
    duration = float(np.sum(dt[both]))
    if duration <= 0.0:
        raise ValueError("contact interval has zero duration")
    return integral / duration


def count_realignments(status: np.ndarray) -> int:
    code = STATUS_CODE[Status.REALIGNING]
    s = np.asarray(status)
    return int(np.sum((s[1:] == code) & (s[:-1] != code)))


def count_contact_transitions(contact_kind: np.ndarray) -> int:
    """Point<->line switches between successive contact-present samples."""
    kinds = np.asarray(contact_kind)
    present = kinds[kinds != 0]
    if len(present) < 2:
        return 0
    return int(np.sum(present[1:] != present[:-1]))


@dataclass
class TrialResult:
    object_kind: str
    friction_set: str
    target: tuple[float, float]
    mode: str
    seed: int
    outcome: str
    min_distance: float            # m, NaN if contact never happened
    completion_time: float | None  # s, successes only
    deviation: float               # m, NaN without a contact interval
    realignments: int
    contact_transitions: int
    contact_lost_total: float      # s without contact over the whole trial
    end_time: float
    trace: TrialTrace | None = None
    trace_path: str | None = None

    def scenario_key(self) -> tuple:
        return (self.object_kind, self.friction_set, self.target[0],
                self.target[1], self.mode, self.seed)


def run_trial(config: ScenarioConfig, keep_trace: bool = False,
              trace_path: str | Path | None = None) -> TrialResult:
    """Run one scenario to completion and compute its metrics.

    The trace is kept in memory when ``keep_trace`` is set and written as a
    JSON-lines log when ``trace_path`` is given.
    """
    model = config.build_object()
    footprint = config.build_footprint()
    taxels = config.build_taxels()
    params = config.build_params()
    want_trace = keep_trace or trace_path is not None

    ws = config.build_world(model, footprint)
    arr = state_to_array(ws, model)
    kind, verts, radius, com, mass, inertia, mu_g, mu_r, sup, supw = pack_object(model)
    comv = Vec2(float(com[0]), float(com[1]))
    diag = np.zeros(_kernels.DIAG_SIZE)
    cmd_arr = np.zeros(3)
    n_sub = config.substeps
    dt = config.dt

    cstate = initial_state(params)
    monitor = TrialMonitor(config.timeout, config.contact_loss_limit,
                           config.d_success, config.contact_loss_cumulative)
    target = Vec2(*config.target)

    rows = []
    taxel_log = [] if want_trace else None
    outcome = None
    tick = 0
    nanv = math.nan
    while True:
        t = tick * config.control_period
        robot_pose = Pose2D(arr[0], arr[1], arr[2])
        origin = Vec2(arr[3], arr[4]) - rotate(arr[5], comv)
        obj_pose = Pose2D(origin.x, origin.y, arr[5])

        active = sample_taxels(robot_pose, model.footprint, obj_pose, taxels)
        report = localize_contact(active, taxels)
        twist, cstate, status, dbg = step_with_debug(
            cstate, ControllerInput(robot_pose, target, report, t), params)

        px, py = (report.point.x, report.point.y) if report.exists else (nanv, nanv)
        rows.append((
            t, arr[0], arr[1], arr[2], obj_pose.x, obj_pose.y, obj_pose.theta,
            1.0 if report.exists else 0.0, float(KIND_CODE[report.kind]),
            px, py, report.lateral if report.exists else nanv,
            float(STATUS_CODE[status]), dbg.rate, dbg.steering,
            dbg.rotation_scale, dbg.distance,
            dbg.raw.vx, dbg.raw.vy, dbg.raw.omega,
            twist.vx, twist.vy, twist.omega,
            diag[_kernels.DIAG_MAX_PEN], diag[_kernels.DIAG_NORMAL_SUM],
        ))
        if taxel_log is not None:
            taxel_log.append(tuple(active))

        outcome = monitor.update(t, report.exists, dbg.distance)
        if outcome is not None:
            break

        cmd_arr[0], cmd_arr[1], cmd_arr[2] = twist.vx, twist.vy, twist.omega
        diag[:] = 0.0
        _kernels.advance(arr, cmd_arr, dt, n_sub, kind, verts, radius, com,
                         mass, inertia, mu_g, mu_r, sup, supw,
                         footprint.half_length, footprint.half_width,
                         footprint.stiffness, footprint.damping,
                         1e-4, 9.81, diag)
        if not np.all(np.isfinite(arr)):
            outcome = OUTCOME_ABORT
            break
        tick += 1

    data = np.asarray(rows)
    trace = TrialTrace(
        time=data[:, 0], robot=data[:, 1:4], object=data[:, 4:7],
        contact_exists=data[:, 7] > 0.5, contact_kind=data[:, 8].astype(np.int8),
        contact_point=data[:, 9:11], lateral=data[:, 11],
        status=data[:, 12].astype(np.int8), rate=data[:, 13],
        steering=data[:, 14], rotation_scale=data[:, 15], distance=data[:, 16],
        raw_twist=data[:, 17:20], command=data[:, 20:23],
        penetration=data[:, 23], normal_force=data[:, 24],
        taxels=taxel_log,
    )

    distances = trace.distance[~np.isnan(trace.distance)]
    min_distance = float(distances.min()) if len(distances) else math.nan
    try:
        deviation = deviation_metric(trace)
    except ValueError:
        deviation = math.nan
    end_time = float(trace.time[-1])

    saved_path = None
    if trace_path is not None:
        write_trace(trace, trace_path)
        saved_path = str(trace_path)

    return TrialResult(
        object_kind=config.object_kind,
        friction_set=config.friction_set,
        target=tuple(config.target),
        mode=config.mode,
        seed=config.seed,
        outcome=outcome,
        min_distance=min_distance,
        completion_time=end_time if outcome == OUTCOME_SUCCESS else None,
        deviation=deviation,
        realignments=count_realignments(trace.status),
        contact_transitions=count_contact_transitions(trace.contact_kind),
        contact_lost_total=monitor.loss_total,
        end_time=end_time,
        trace=trace if keep_trace else None,
        trace_path=saved_path,
    )


# --- trace serialization ----------------------------------------------------

def _opt(x: float):
    return None if (x is None or (isinstance(x, float) and math.isnan(x))) else x


def write_trace(trace: TrialTrace, path) -> None:
    """Write a trace as one JSON object per line (schema in the README)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        for i in range(len(trace)):
            exists = bool(trace.contact_exists[i])
            rec = {
                "t": float(trace.time[i]),
                "robot": [float(v) for v in trace.robot[i]],
                "object": [float(v) for v in trace.object[i]],
                "contact": {
                    "exists": exists,
                    "kind": KIND_NAME[int(trace.contact_kind[i])],
                    "point": [float(v) for v in trace.contact_point[i]] if exists else None,
                    "lateral": _opt(float(trace.lateral[i])) if exists else None,
                },
                "taxels": list(trace.taxels[i]) if trace.taxels is not None else None,
                "status": STATUS_NAME[int(trace.status[i])],
                "rate": _opt(float(trace.rate[i])),
                "steering": _opt(float(trace.steering[i])),
                "rotation_scale": _opt(float(trace.rotation_scale[i])),
                "distance": _opt(float(trace.distance[i])),
                "raw": [float(v) for v in trace.raw_twist[i]],
                "cmd": [float(v) for v in trace.command[i]],
                "penetration": float(trace.penetration[i]),
                "normal_force": float(trace.normal_force[i]),
            }
            f.write(json.dumps(rec) + "\n")


def read_trace(path) -> TrialTrace:
    """Read back a JSON-lines trace written by ``write_trace``."""
    nanv = math.nan
    cols: dict[str, list] = {k: [] for k in (
        "t", "robot", "object", "exists", "kind", "point", "lateral", "status",
        "rate", "steering", "scale", "distance", "raw", "cmd", "pen", "nf")}
    taxels = []
    kind_code = {v: k for k, v in KIND_NAME.items()}
    status_code = {v: k for k, v in STATUS_NAME.items()}
    with Path(path).open() as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            c = rec["contact"]
            cols["t"].append(rec["t"])
            cols["robot"].append(rec["robot"])
            cols["object"].append(rec["object"])
            cols["exists"].append(bool(c["exists"]))
            cols["kind"].append(kind_code[c["kind"]])
            cols["point"].append(c["point"] if c["point"] is not None else [nanv, nanv])
            cols["lateral"].append(c["lateral"] if c["lateral"] is not None else nanv)
            cols["status"].append(status_code[rec["status"]])
            for key, name in (("rate", "rate"), ("steering", "steering"),
                              ("scale", "rotation_scale"), ("distance", "distance")):
                v = rec[name]
                cols[key].append(nanv if v is None else v)
            cols["raw"].append(rec["raw"])
            cols["cmd"].append(rec["cmd"])
            cols["pen"].append(rec["penetration"])
            cols["nf"].append(rec["normal_force"])
            taxels.append(tuple(rec["taxels"]) if rec.get("taxels") is not None else ())
    return TrialTrace(
        time=np.asarray(cols["t"]), robot=np.asarray(cols["robot"]),
        object=np.asarray(cols["object"]),
        contact_exists=np.asarray(cols["exists"], dtype=bool),
        contact_kind=np.asarray(cols["kind"], dtype=np.int8),
        contact_point=np.asarray(cols["point"]),
        lateral=np.asarray(cols["lateral"]),
        status=np.asarray(cols["status"], dtype=np.int8),
        rate=np.asarray(cols["rate"]), steering=np.asarray(cols["steering"]),
        rotation_scale=np.asarray(cols["scale"]),
        distance=np.asarray(cols["distance"]),
        raw_twist=np.asarray(cols["raw"]), command=np.asarray(cols["cmd"]),
        penetration=np.asarray(cols["pen"]), normal_force=np.asarray(cols["nf"]),
        taxels=taxels,
    )
