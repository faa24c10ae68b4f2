import math

import numpy as np
import pytest

from pushbench.geometry import Pose2D, Twist2D, Vec2
from pushbench.objects import GRAVITY, make_object
from pushbench import _kernels
from pushbench.world import (
    ContactPoint,
    NumericalInstability,
    RobotFootprint,
    WorldState,
    advance,
    detect_contact,
    ground_friction_wrench,
    initial_world_state,
    robot_contact_wrench,
    state_to_array,
    step,
)

FP = RobotFootprint()
HL, HW = FP.half_length, FP.half_width


def flush_world(model, pen=0.0, gap=0.0):
    return initial_world_state(model, FP, gap=gap - pen)


class TestFootprintGeometry:
    def test_critical_region_matches_half_width(self):
        # 0.24 m critical offset + 0.05 m critical band = 0.29 m half width.
        assert 0.24 + 0.05 == pytest.approx(HW)

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            RobotFootprint(half_length=0.0)


class TestDetectContact:
    def test_separated(self):
        m = make_object("uniform_box", "S1")
        assert detect_contact(Pose2D(), FP, m, Pose2D(1.575, 0.0, 0.0)) == []

    def test_corner_touch_single_point(self):
        m = make_object("uniform_box", "S1")
        # 45-degree box, corner 1 mm into the front face.
        half_diag = 0.2 * math.sqrt(2.0)
        pose = Pose2D(HL - 0.001 + half_diag, 0.0, math.pi / 4.0)
        pts = detect_contact(Pose2D(), FP, m, pose)
        assert len(pts) == 1
        cp = pts[0]
        assert cp.penetration == pytest.approx(0.001, abs=1e-9)
        assert cp.normal.x == pytest.approx(1.0, abs=1e-12)
        assert cp.normal.y == pytest.approx(0.0, abs=1e-12)

    def test_flush_face_two_points_at_overlap_ends(self):
        # Segment-clipping oracle: a 0.30 m wide face inside the 0.58 m front
        # edge overlaps on [-0.15, 0.15]; manifold points sit at the ends.
        m = make_object("uniform_box", "S1")
        from pushbench.objects import ObjectModel, PolygonFootprint, rect_vertices

        narrow = ObjectModel(
            footprint=PolygonFootprint(rect_vertices(0.2, 0.15)),
            mass=10.0, com_offset=Vec2(0, 0), yaw_inertia=0.1,
            support_points=np.zeros((1, 2)), support_weights=np.ones(1),
            mu_ground=0.3, mu_robot=0.35)
        pose = Pose2D(HL - 0.001 + 0.2, 0.0, 0.0)
        pts = detect_contact(Pose2D(), FP, narrow, pose)
        assert len(pts) == 2
        ys = sorted(p.position.y for p in pts)
        assert ys[0] == pytest.approx(-0.15, abs=1e-9)
        assert ys[1] == pytest.approx(0.15, abs=1e-9)
        for p in pts:
            assert p.penetration == pytest.approx(0.001, abs=1e-9)

    def test_wide_face_clipped_to_edge_span(self):
        m = make_object("uniform_box", "S1")  # 0.40 wide on a 0.58 edge
        pose = Pose2D(HL - 0.001 + 0.2, 0.3, 0.0)  # sticks out past the corner
        pts = detect_contact(Pose2D(), FP, m, pose)
        assert len(pts) == 2
        ys = sorted(p.position.y for p in pts)
        assert ys[1] == pytest.approx(HW, abs=1e-9)  # clipped at the corner
        assert ys[0] == pytest.approx(0.1, abs=1e-9)  # object face end

    def test_disk_single_point(self):
        m = make_object("cylinder", "S1")
        pose = Pose2D(HL - 0.002 + 0.25, 0.1, 0.0)
        pts = detect_contact(Pose2D(), FP, m, pose)
        assert len(pts) == 1
        assert pts[0].penetration == pytest.approx(0.002, abs=1e-12)
        assert pts[0].normal.x == 1.0


class TestGroundFriction:
    def test_rest_gives_zero(self):
        m = make_object("uniform_box", "S1")
        f, tau = ground_friction_wrench(Pose2D(), (0.0, 0.0, 0.0), m)
        assert (f.x, f.y, tau) == (0.0, 0.0, 0.0)

    def test_pure_translation_coulomb_magnitude(self):
        m = make_object("uniform_box", "S1")
        f, tau = ground_friction_wrench(Pose2D(), (0.05, 0.0, 0.0), m)
        assert f.x == pytest.approx(-0.3 * 20.0 * GRAVITY, rel=1e-12)
        assert f.y == pytest.approx(0.0, abs=1e-9)
        assert tau == pytest.approx(0.0, abs=1e-9)

    def test_disk_braking_torque_vs_analytic_integral(self):
        # Analytic oracle for a uniform disk: (2/3) mu m g r.
        m = make_object("cylinder", "S1")
        f, tau = ground_friction_wrench(Pose2D(), (0.0, 0.0, 1.0), m)
        analytic = (2.0 / 3.0) * 0.3 * 25.0 * GRAVITY * 0.25
        assert analytic == pytest.approx(12.2625, abs=1e-9)
        assert -tau == pytest.approx(analytic, rel=0.03)
        assert abs(f.norm()) < 1e-9

    def test_opposes_velocity_direction(self):
        m = make_object("uniform_box", "S2")
        rng = np.random.default_rng(3)
        for _ in range(200):
            v = (float(rng.normal()), float(rng.normal()), float(rng.normal()))
            f, tau = ground_friction_wrench(
                Pose2D(0, 0, float(rng.uniform(-3, 3))), v, m)
            power = f.x * v[0] + f.y * v[1] + tau * v[2]
            assert power <= 1e-12


class TestRobotContactWrench:
    def test_zero_penetration(self):
        cp = ContactPoint(Vec2(0.375, 0.0), Vec2(1.0, 0.0), 0.0)
        out = robot_contact_wrench([cp], [Vec2(0.0, 0.0)], 0.35)
        assert out[0].normal_force == 0.0
        assert out[0].total == Vec2(0.0, 0.0)

    def test_linear_spring(self):
        cp = ContactPoint(Vec2(0.375, 0.0), Vec2(1.0, 0.0), 0.001)
        out = robot_contact_wrench([cp], [Vec2(0.0, 0.0)], 0.35, stiffness=5e4)
        assert out[0].normal_force == pytest.approx(50.0, abs=1e-12)

    def test_cone_saturation(self):
        # mu * N oracle: 0.35 * 50 = 17.5 N tangential cap.
        cp = ContactPoint(Vec2(0.375, 0.0), Vec2(1.0, 0.0), 0.001)
        out = robot_contact_wrench([cp], [Vec2(0.0, 1.0)], 0.35, stiffness=5e4)
        assert out[0].tangential.norm() == pytest.approx(17.5, abs=1e-9)
        assert out[0].tangential.y == pytest.approx(-17.5, abs=1e-9)

    def test_damping_term(self):
        cp = ContactPoint(Vec2(0.375, 0.0), Vec2(1.0, 0.0), 0.001)
        # Object approaching at 0.01 m/s along -n: pen rate +0.01.
        out = robot_contact_wrench([cp], [Vec2(-0.01, 0.0)], 0.35,
                                   stiffness=5e4, damping=200.0)
        assert out[0].normal_force == pytest.approx(50.0 + 2.0, abs=1e-12)

    def test_cone_never_exceeded_randomized(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            pen = float(rng.uniform(0, 0.005))
            n = Vec2(1.0, 0.0)
            cp = ContactPoint(Vec2(0.375, 0.0), n, pen)
            rel = Vec2(float(rng.normal()), float(rng.normal()))
            out = robot_contact_wrench([cp], [rel], 0.5)[0]
            assert out.tangential.norm() <= 0.5 * out.normal_force + 1e-9


class TestStep:
    def test_no_contact_kinematic_robot_static_object(self):
        m = make_object("uniform_box", "S1")
        ws = initial_world_state(m, FP, gap=1.0)
        x_obj = ws.object_pose.x
        for _ in range(1000):
            ws = step(ws, m, FP, Twist2D(0.05, 0.0, 0.0), 0.001)
        assert ws.robot.x == pytest.approx(0.05, abs=1e-9)
        assert ws.object_pose.x == x_obj
        assert ws.object_velocity == (0.0, 0.0, 0.0)

    def test_object_at_rest_stays_at_rest(self):
        m = make_object("cylinder", "S2")
        ws = initial_world_state(m, FP, gap=0.3)
        ws2, diag = advance(ws, m, FP, Twist2D(), 0.001, 3000)
        assert ws2.object_pose == ws.object_pose
        assert ws2.object_velocity == (0.0, 0.0, 0.0)

    def test_flush_push_reaches_commanded_speed(self):
        # Force-balance oracle: penalty grows until it beats mu m g, then the
        # object tracks the commanded 0.05 m/s.
        m = make_object("uniform_box", "S1")
        ws = initial_world_state(m, FP, gap=0.0)
        cmd = Twist2D(0.05, 0.0, 0.0)
        ws, diag = advance(ws, m, FP, cmd, 0.001, 10000)
        speed = math.hypot(ws.object_velocity[0], ws.object_velocity[1])
        assert abs(speed - 0.05) / 0.05 < 0.05
        assert diag[_kernels.DIAG_MAX_PEN] < 0.002

    def test_quasi_static_decay_after_free_motion(self):
        m = make_object("uniform_box", "S1")
        ws = initial_world_state(m, FP, gap=0.5)
        ws.object_velocity = (0.05, -0.03, 0.2)
        ws2, _ = advance(ws, m, FP, Twist2D(), 0.001, 500)  # 0.5 s
        assert math.hypot(ws2.object_velocity[0], ws2.object_velocity[1]) < 1e-4
        assert abs(ws2.object_velocity[2]) < 1e-3

    def test_quasi_static_after_push_stops(self):
        m = make_object("nonuniform_box", "S2")
        ws = initial_world_state(m, FP, gap=0.0)
        ws, _ = advance(ws, m, FP, Twist2D(0.05, 0.01, 0.05), 0.001, 4000)
        ws, _ = advance(ws, m, FP, Twist2D(), 0.001, 500)
        assert math.hypot(ws.object_velocity[0], ws.object_velocity[1]) < 1e-3

    def test_dt_bounds(self):
        m = make_object("uniform_box", "S1")
        ws = initial_world_state(m, FP)
        with pytest.raises(ValueError):
            step(ws, m, FP, Twist2D(), 0.02)
        with pytest.raises(ValueError):
            step(ws, m, FP, Twist2D(), 0.0)

    def test_non_finite_state_rejected(self):
        m = make_object("uniform_box", "S1")
        ws = initial_world_state(m, FP)
        ws.object_velocity = (math.nan, 0.0, 0.0)
        with pytest.raises(NumericalInstability):
            step(ws, m, FP, Twist2D(), 0.001)

    def test_reference_step_matches_kernel(self):
        # Same trajectory through the pure-Python reference and the kernel.
        for kind in ("uniform_box", "nonuniform_box", "cylinder"):
            m = make_object(kind, "S2")
            ws_ref = initial_world_state(m, FP, gap=0.002)
            cmd = Twist2D(0.05, 0.015, 0.08)
            n = 1500
            ref = ws_ref
            for _ in range(n):
                ref = step(ref, m, FP, cmd, 0.001)
            fast, _ = advance(ws_ref, m, FP, cmd, 0.001, n)
            a = state_to_array(ref, m)
            b = state_to_array(fast, m)
            assert np.max(np.abs(a - b)) < 1e-10

    def test_determinism_bit_identical(self):
        m = make_object("cylinder", "S1")
        ws = initial_world_state(m, FP, gap=0.0)
        cmd = Twist2D(0.04, -0.02, 0.1)
        a, diag_a = advance(ws, m, FP, cmd, 0.001, 5000)
        b, diag_b = advance(ws, m, FP, cmd, 0.001, 5000)
        assert state_to_array(a, m).tobytes() == state_to_array(b, m).tobytes()
        assert diag_a.tobytes() == diag_b.tobytes()


class TestInvariantsFuzz:
    @pytest.mark.parametrize("kind,fric", [
        ("uniform_box", "S1"), ("nonuniform_box", "S2"), ("cylinder", "S2")])
    def test_sixty_second_random_command_fuzz(self, kind, fric):
        # Friction cone, penetration bound, and energy audit at every substep
        # of a 60 s random-command run.
        m = make_object(kind, fric)
        ws = initial_world_state(m, FP, gap=0.0)
        rng = np.random.default_rng(99)
        max_pen = 0.0
        for _ in range(60):
            cmd = Twist2D(float(rng.uniform(0.0, 0.05)),
                          float(rng.uniform(-0.05, 0.05)),
                          float(rng.uniform(-0.15, 0.15)))
            ws, diag = advance(ws, m, FP, cmd, 0.001, 1000)
            assert diag[_kernels.DIAG_CONE_EXCESS] <= 1e-9
            assert diag[_kernels.DIAG_GROUND_EXCESS] <= 1e-9
            assert diag[_kernels.DIAG_ENERGY_RES] <= 1e-6
            max_pen = max(max_pen, diag[_kernels.DIAG_MAX_PEN])
        assert max_pen < 0.005
