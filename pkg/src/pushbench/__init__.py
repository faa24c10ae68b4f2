"""Tactile-reactive planar pushing workbench.

A 2D quasi-static pushing simulator with a virtual taxel strip on the robot
base, a reactive pushing controller plus its non-reactive baseline, and a
batch harness that runs target-grid campaigns and exports their metrics.
"""

from .geometry import Pose2D, Twist2D, Vec2, angle_diff, rotate, wrap_angle
from .tactile import ContactKind, ContactReport, TaxelArray, localize_contact, make_taxel_array, sample_taxels
from .controller import (
    ControllerInput,
    ControllerParams,
    ControllerState,
    Status,
    controller_step,
    initial_state,
    step_with_debug,
)
from .objects import FRICTION_SETS, OBJECT_KINDS, DiskFootprint, ObjectModel, PolygonFootprint, make_object
from .world import (
    ContactPoint,
    NumericalInstability,
    RobotFootprint,
    WorldState,
    advance,
    detect_contact,
    ground_friction_wrench,
    initial_world_state,
    robot_contact_wrench,
    step,
)

__version__ = "0.1.0"
