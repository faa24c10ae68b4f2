import math
from dataclasses import replace

import numpy as np
import pytest

from pushbench.controller import (
    GAMMA_LIMIT,
    ControllerInput,
    ControllerParams,
    Status,
    controller_step,
    displacement,
    initial_state,
    lateral_rate,
    linear_velocity,
    push_speed,
    realign_turn_rate,
    rotation_scale,
    steering_angle,
    step_with_debug,
    turn_rate,
)
from pushbench.geometry import Pose2D, Twist2D, Vec2, rotate
from pushbench.tactile import ContactKind, ContactReport


def params(**kw) -> ControllerParams:
    return ControllerParams(**kw)


def contact_at(y: float, x: float = 0.375) -> ContactReport:
    return ContactReport(True, ContactKind.POINT, Vec2(x, y), y, (0,))


def make_input(robot=Pose2D(), target=Vec2(5.0, 0.0), contact=None, time=0.0):
    return ControllerInput(robot, target, contact or contact_at(0.0), time)


class TestDisplacement:
    def test_collinear(self):
        d = displacement(Pose2D(0, 0, 0), Vec2(2, 0), Vec2(0.4, 0))
        assert (d.x, d.y) == (1.6, 0.0)

    def test_coincident(self):
        robot = Pose2D(0.3, -0.2, 1.1)
        p_c = Vec2(0.4, 0.05)
        target = robot.position + rotate(robot.theta, p_c)
        d = displacement(robot, target, p_c)
        assert d.norm() == pytest.approx(0.0, abs=1e-15)

    def test_rotated_frame_vs_rotate_oracle(self):
        # rotate oracle: R(pi/2) (0.4, 0) = (0, 0.4)
        rc = rotate(math.pi / 2.0, Vec2(0.4, 0.0))
        assert (round(rc.x, 15), rc.y) == (0.0, pytest.approx(0.4, abs=1e-15))
        d = displacement(Pose2D(0, 0, math.pi / 2.0), Vec2(0, 2), Vec2(0.4, 0))
        assert d.x == pytest.approx(0.0, abs=1e-12)
        assert d.y == pytest.approx(1.6, abs=1e-12)


class TestPushSpeed:
    def test_unit_distance(self):
        assert push_speed(1.0, params()) == 0.1

    def test_zero(self):
        assert push_speed(0.0, params()) == 0.0

    def test_linearity(self):
        assert push_speed(2.0, params()) == pytest.approx(0.2, abs=1e-15)


class TestLateralRate:
    def test_zero_inside_cutoff(self):
        for offset in (-0.2, 0.0, 0.23):
            assert lateral_rate(offset, 0.4, params()) == 0.0

    def test_inflection_point_halves_range(self):
        assert lateral_rate(0.12, 0.6, params()) == 5.0

    def test_near_edge_vs_scalar_oracle(self):
        expected = -(0.0 + 10.0 / (1.0 + math.exp((0.12 - 0.24) * 60.0)))
        got = lateral_rate(-0.24, 0.6, params())
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(-9.99253, abs=1e-5)

    def test_bounded_odd_monotone(self):
        p = params()
        rng = np.random.default_rng(2)
        offsets = np.sort(rng.uniform(0.0, 0.4, size=1000))
        vals = [lateral_rate(float(o), 1.0, p) for o in offsets]
        assert all(abs(v) < p.rate_ceiling for v in vals)
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        for o in offsets[:200]:
            assert lateral_rate(-float(o), 1.0, p) == pytest.approx(
                -lateral_rate(float(o), 1.0, p), abs=1e-15)

    def test_sign_of_zero(self):
        assert lateral_rate(0.0, 1.0, params()) == 0.0


class TestLinearVelocity:
    def test_pure_forward(self):
        assert linear_velocity(0.1, 0.0) == (0.1, 0.0)

    def test_unit_rate_vs_sqrt2_oracle(self):
        vx, vy = linear_velocity(0.1, 1.0)
        expected = 0.1 / math.sqrt(2.0)
        assert vx == pytest.approx(expected, abs=1e-12)
        assert vy == pytest.approx(expected, abs=1e-12)
        assert vx == pytest.approx(0.070711, abs=1e-6)

    def test_sign_symmetry(self):
        vx_p, vy_p = linear_velocity(0.1, 1.0)
        vx_n, vy_n = linear_velocity(0.1, -1.0)
        assert vx_n == vx_p
        assert vy_n == -vy_p

    def test_norm_preserved_randomized(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            speed = float(rng.uniform(0.0, 1.0))
            rate = float(rng.uniform(-20.0, 20.0))
            vx, vy = linear_velocity(speed, rate)
            assert math.hypot(vx, vy) == pytest.approx(speed, abs=1e-12)
            assert vx >= 0.0
            if rate != 0.0 and speed > 0.0:
                assert math.copysign(1.0, vy) == math.copysign(1.0, rate)


class TestSteering:
    def test_aligned(self):
        assert steering_angle(Vec2(1, 0), 0.0, params()) == 0.0

    def test_clamped_quarter_turn(self):
        assert steering_angle(Vec2(0, 1), 0.0, params()) == pytest.approx(
            math.pi / 2.0 - 0.01, abs=1e-15)

    def test_clamped_wrapped_case(self):
        # angle_diff(pi, pi/2) = pi/2, then clamped.
        assert steering_angle(Vec2(-1, 0), math.pi / 2.0, params()) == pytest.approx(
            math.pi / 2.0 - 0.01, abs=1e-15)

    def test_zero_displacement_rejected(self):
        with pytest.raises(ValueError):
            steering_angle(Vec2(0.0, 0.0), 0.0, params())

    def test_always_within_limit(self):
        rng = np.random.default_rng(8)
        p = params()
        for _ in range(1000):
            d = Vec2(float(rng.normal()), float(rng.normal()))
            if d.norm() == 0.0:
                continue
            g = steering_angle(d, float(rng.uniform(-math.pi, math.pi)), p)
            assert abs(g) <= GAMMA_LIMIT


class TestTurnRates:
    def test_zero_steering(self):
        assert turn_rate(0.05, 0.0, params()) == 0.0

    def test_quarter_steer(self):
        # tan(pi/4) = 1 -> 0.25 before the output clamp.
        assert turn_rate(0.05, math.pi / 4.0, params()) == pytest.approx(0.25, abs=1e-12)

    def test_small_angle_vs_tan_oracle(self):
        expected = 0.02 / 0.2 * math.tan(0.1)
        got = turn_rate(0.02, 0.1, params())
        assert got == pytest.approx(expected, abs=1e-15)
        assert got == pytest.approx(0.0100335, abs=1e-6)

    def test_rotation_scale_profile(self):
        p = params()
        assert rotation_scale(0.0, p) == 1.0
        assert rotation_scale(0.25, p) == 0.0
        assert rotation_scale(-0.25, p) == 0.0
        assert rotation_scale(0.12, p) == pytest.approx(0.5, abs=1e-12)
        rng = np.random.default_rng(12)
        offsets = np.sort(rng.uniform(0.0, 0.5, size=1000))
        vals = [rotation_scale(float(o), p) for o in offsets]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
        assert all(v == 0.0 for o, v in zip(offsets, vals) if o >= p.critical_offset)

    def test_realign_turn_rate_attenuation(self):
        got = realign_turn_rate(0.1, 0.12, math.pi / 4.0, params())
        assert got == pytest.approx(0.25, abs=1e-12)  # sigma 0.5 * (0.1/0.2) * 1
        assert realign_turn_rate(0.1, 0.25, math.pi / 4.0, params()) == 0.0


class TestParamsValidation:
    def test_bad_mode(self):
        with pytest.raises(ValueError):
            params(mode="aps")

    def test_bad_rate_bounds(self):
        with pytest.raises(ValueError):
            params(rate_floor=5.0, rate_ceiling=2.0)

    def test_bad_offsets(self):
        with pytest.raises(ValueError):
            params(middle_offset=0.3, critical_offset=0.24)


class TestControllerStep:
    def test_approach_before_any_contact(self):
        p = params()
        st = initial_state(p)
        twist, st, status = controller_step(
            st, ControllerInput(Pose2D(), Vec2(2, 0), ContactReport.none()), p)
        assert status == Status.APPROACHING
        assert (twist.vx, twist.vy, twist.omega) == (0.01, 0.0, 0.0)

    def test_reached_inside_success_radius(self):
        p = params()
        st = initial_state(p)
        inp = ControllerInput(Pose2D(), Vec2(0.415, 0.0), contact_at(0.0))
        twist, st, status = controller_step(st, inp, p)  # |d| = 0.04 < 0.05
        assert status == Status.REACHED
        assert (twist.vx, twist.vy, twist.omega) == (0.0, 0.0, 0.0)

    def test_reached_latches(self):
        p = params()
        st = initial_state(p)
        inp = ControllerInput(Pose2D(), Vec2(0.415, 0.0), contact_at(0.0))
        _, st, status = controller_step(st, inp, p)
        assert status == Status.REACHED
        far = ControllerInput(Pose2D(), Vec2(4.0, 0.0), contact_at(0.0))
        for _ in range(3):
            twist, st, status = controller_step(st, far, p)
            assert status == Status.REACHED
            assert (twist.vx, twist.vy, twist.omega) == (0.0, 0.0, 0.0)

    def test_realignment_entry_and_hysteresis(self):
        p = params()
        st = initial_state(p)
        assert st.threshold == 0.24
        # Offset just past the critical region.
        twist, st, status = controller_step(
            st, make_input(contact=contact_at(0.25)), p)
        assert status == Status.REALIGNING
        assert st.threshold == p.middle_offset == 0.05
        assert twist.vy > 0.0
        # Hysteresis: 0.10 is inside the critical region but above middle_offset.
        twist, st, status = controller_step(
            st, make_input(contact=contact_at(0.10)), p)
        assert status == Status.REALIGNING
        assert st.threshold == 0.05
        # Back inside the middle region: normal pushing resumes.
        twist, st, status = controller_step(
            st, make_input(contact=contact_at(0.04)), p)
        assert status == Status.PUSHING
        assert st.threshold == 0.24

    def test_realignment_uses_max_rate_and_attenuated_rotation(self):
        p = params()
        st = initial_state(p)
        _, _, _, dbg = step_with_debug(st, make_input(contact=contact_at(-0.26)), p)
        assert dbg.status == Status.REALIGNING
        assert dbg.rate == -p.realign_rate
        assert dbg.rotation_scale == 0.0
        assert dbg.raw.omega == 0.0

    def test_dropout_holds_last_point_and_creeps(self):
        p = params()
        st = initial_state(p)
        _, st, status = controller_step(st, make_input(contact=contact_at(0.1)), p)
        assert status == Status.PUSHING
        twist, st, status, dbg = step_with_debug(
            st, ControllerInput(Pose2D(), Vec2(5, 0), ContactReport.none(), 1.0), p)
        assert status == Status.APPROACHING
        assert (twist.vx, twist.vy, twist.omega) == (0.01, 0.0, 0.0)
        assert not math.isnan(dbg.distance)

    def test_output_saturation(self):
        p = params()
        rng = np.random.default_rng(21)
        st = initial_state(p)
        for _ in range(1000):
            contact = contact_at(float(rng.uniform(-0.3, 0.3)))
            inp = ControllerInput(
                Pose2D(float(rng.normal()), float(rng.normal()),
                       float(rng.uniform(-math.pi, math.pi))),
                Vec2(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3))),
                contact)
            twist, st, status = controller_step(st, inp, p)
            assert twist.linear_norm() <= p.v_lin_max + 1e-12
            assert abs(twist.omega) <= p.omega_max + 1e-12

    def test_nps_never_realigns_and_keeps_rate_zero(self):
        p = params(mode="nps")
        st = initial_state(p)
        rng = np.random.default_rng(31)
        for _ in range(500):
            contact = contact_at(float(rng.uniform(-0.29, 0.29)))
            twist, st, status, dbg = step_with_debug(
                st, make_input(contact=contact), p)
            assert status in (Status.PUSHING, Status.REACHED)
            assert st.threshold == p.critical_offset
            if status == Status.PUSHING:
                assert dbg.rate == 0.0
                assert dbg.raw.vy == 0.0

    def test_mode_equivalence_when_rate_vanishes(self):
        # Centered contact makes the reactive lateral rate exactly zero, so the
        # reactive and non-reactive laws must emit identical twists.
        p_rps = params(mode="rps")
        p_nps = params(mode="nps")
        rng = np.random.default_rng(41)
        for _ in range(500):
            robot = Pose2D(float(rng.normal()), float(rng.normal()),
                           float(rng.uniform(-math.pi, math.pi)))
            target = Vec2(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
            inp = ControllerInput(robot, target, contact_at(0.0))
            t1, _, s1 = controller_step(initial_state(p_rps), inp, p_rps)
            t2, _, s2 = controller_step(initial_state(p_nps), inp, p_nps)
            assert s1 == s2
            assert (t1.vx, t1.vy, t1.omega) == (t2.vx, t2.vy, t2.omega)

    def test_hysteresis_state_machine_randomized(self):
        p = params()
        st = initial_state(p)
        rng = np.random.default_rng(51)
        realigning = False
        for _ in range(2000):
            offset = float(rng.uniform(-0.3, 0.3))
            _, st, status = controller_step(st, make_input(contact=contact_at(offset)), p)
            if status == Status.REACHED:
                break
            # Independent two-threshold model of the hysteresis.
            if not realigning and abs(offset) > p.critical_offset:
                realigning = True
            elif realigning and abs(offset) <= p.middle_offset:
                realigning = False
            assert (status == Status.REALIGNING) == realigning
            assert st.threshold in (p.middle_offset, p.critical_offset)
            assert (st.threshold == p.middle_offset) == realigning

    def test_step_is_pure_in_state(self):
        p = params()
        st = initial_state(p)
        inp = make_input(contact=contact_at(0.26))
        _, st2, _ = controller_step(st, inp, p)
        assert st.threshold == p.critical_offset
        assert st2.threshold == p.middle_offset
